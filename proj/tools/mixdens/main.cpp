#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "cli_common.hpp"
#include "commands.hpp"
#include "mixdens/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mixdens: mixing-density estimation toolkit"};
  app.require_subcommand(1);

  using namespace mixdens::cli;
  register_simulate(app);
  register_fit(app);
  register_posterior(app);
  register_evaluate(app);
  register_coverage(app);
  register_cv(app);
  register_sensitivity(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const mixdens::input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const mixdens::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const mixdens::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
