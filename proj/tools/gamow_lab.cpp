// gamow_lab: resonance states of the spherical shell potential from the command line.
// Flags override the config file, which overrides the built-in defaults.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "gamow/commands.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> a, b, v0, t, r_min, r_max, t_stop, tol_all;
  std::optional<int> n_max, n, samples;
  std::optional<std::string> out, format, bra, ket, packet;
  std::map<std::string, std::optional<double>> tol;
};

gamow::RunConfig load(const Overrides& o) {
  gamow::RunConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw gamow::ConfigError("cannot read config file '" + o.config_path + "'");
    std::stringstream text;
    text << in.rdbuf();
    cfg = gamow::parse_config_text(text.str());
  }
  if (o.a) cfg.a = *o.a;
  if (o.b) cfg.b = *o.b;
  if (o.v0) cfg.v0 = *o.v0;
  if (o.out) cfg.out = *o.out;
  if (o.format) cfg.format = *o.format;
  if (o.t) cfg.expand.t = *o.t;
  if (o.n_max) cfg.expand.n_max = *o.n_max;
  if (o.bra) cfg.expand.bra = *o.bra;
  if (o.ket) cfg.expand.ket = *o.ket;
  if (o.packet) cfg.survival.packet = *o.packet;
  if (o.t_stop) cfg.survival.t_stop = *o.t_stop;
  if (o.n) cfg.eigenfunction.n = *o.n;
  if (o.r_min) cfg.eigenfunction.r_min = *o.r_min;
  if (o.r_max) cfg.eigenfunction.r_max = *o.r_max;
  if (o.samples) cfg.eigenfunction.samples = *o.samples;
  if (o.tol_all)
    for (auto& [name, v] : cfg.tolerances) v = *o.tol_all;
  for (const auto& [name, v] : o.tol)
    if (v) cfg.tolerances[name] = *v;
  return cfg;
}

int emit(const gamow::CommandResult& res, const std::string& path) {
  if (!res.output.empty()) {
    if (path.empty() || path == "-") {
      std::cout << res.output << std::flush;
    } else {
      std::ofstream out(path, std::ios::binary);
      out << res.output;
      if (!out) {
        std::cerr << "error: cannot write '" << path << "'\n";
        return gamow::exit_config;
      }
    }
  }
  if (!res.message.empty()) std::cerr << (res.exit_code == 0 ? "" : "error: ") << res.message << '\n';
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance (Gamow) states of the spherical shell potential"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Overrides o;
  bool print_config = false;

  app.add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--a", o.a, "inner shell radius");
  app.add_option("--b", o.b, "outer shell radius");
  app.add_option("--v0", o.v0, "shell height (negative: attractive)");
  app.add_option("--out", o.out, "output path, '-' for stdout");
  app.add_option("--format", o.format, "auto, json or csv");
  app.add_option("--n-max", o.n_max, "expand: number of resonance terms");
  app.add_option("--t", o.t, "expand: time");
  app.add_option("--tol-all", o.tol_all, "set every named tolerance");
  for (const auto& [name, value] : gamow::RunConfig::default_tolerances()) {
    std::string flag = "--tol-" + name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app.add_option(flag, o.tol[name], name + " tolerance (default " + std::to_string(value) + ")");
  }
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  app.add_subcommand("poles", "pole table of the shell");
  auto* eig = app.add_subcommand("eigenfunction", "samples of the Gamow eigenfunction u(r; z_n)");
  eig->add_option("--n", o.n, "resonance index");
  eig->add_option("--r-min", o.r_min, "first radius");
  eig->add_option("--r-max", o.r_max, "last radius");
  eig->add_option("--samples", o.samples, "number of equally spaced radii");
  app.add_subcommand("check", "run the identity checks");
  auto* exp = app.add_subcommand("expand", "resonance expansion of <bra| e^{-iHt} |ket>");
  exp->add_option("--bra", o.bra, "outgoing packet name");
  exp->add_option("--ket", o.ket, "incoming packet name");
  auto* surv = app.add_subcommand("survival", "survival probability and its exponential fit");
  surv->add_option("--packet", o.packet, "packet name");
  surv->add_option("--t-stop", o.t_stop, "last time of the geometric grid");
  app.add_subcommand("print-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gamow::exit_config;
  }

  std::string command = "print-config";
  if (!print_config) {
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::cerr << app.help();
      return gamow::exit_config;
    }
    command = subs.front()->get_name();
  }

  gamow::RunConfig cfg;
  try {
    cfg = load(o);
  } catch (const gamow::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gamow::exit_config;
  }
  return emit(gamow::run_command(command, cfg), cfg.out);
}
