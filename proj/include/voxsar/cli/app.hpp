#pragma once

// Subcommand front end. run_cli() never throws: failures print one
// `error: <code>: <message>` line on the error stream and return nonzero.

#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "voxsar/cli/io.hpp"
#include "voxsar/cli/sweep.hpp"

namespace voxsar::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2, input = 3, invalid = 4, unstable = 5 };

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  std::string seed, distances, powers, powers_dbm, densities, frequency;
  std::vector<std::string> sets;
};

namespace detail {

inline Config build_config(const Flags &f) {
  Config c;
  if (!f.config.empty())
    c.merge_file(f.config);
  c.merge_overrides(f.sets);
  const std::pair<const std::string *, const char *> flag_keys[] = {
      {&f.seed, "seed"},         {&f.distances, "distances_mm"}, {&f.powers, "powers_w"},
      {&f.powers_dbm, "powers_dbm"}, {&f.densities, "densities"},   {&f.frequency, "frequency_ghz"},
  };
  for (const auto &[value, key] : flag_keys)
    if (!value->empty())
      c.set(key, *value == "none" ? "" : *value);
  return c;
}

class Output {
public:
  Output(const std::string &path, std::ostream &fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_)
        throw Error("cannot write '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream &stream() { return *os_; }

private:
  std::ofstream file_;
  std::ostream *os_;
};

inline fdtd::PhasorField load_field(const Config &c, std::map<std::string, std::string> &meta) {
  auto pf = read_phasors(c.raw("phasor_file"));
  meta = pf.meta;
  return std::move(pf.field);
}

inline double meta_number(const std::map<std::string, std::string> &meta, const std::string &key) {
  auto it = meta.find(key);
  std::optional<double> v;
  if (it == meta.end() || !(v = text::parse_double(it->second)))
    throw Error("phasor file lacks meta '" + key + "'");
  return *v;
}

inline int cmd_phantom_gen(const Config &c, const Flags &f, std::ostream &out) {
  const auto s = resolve_settings(c);
  if (f.out.empty())
    throw ConfigError({"phantom-gen needs --out PATH"});
  const auto ph = generate_phantom(s.phantom, s.resolution, s.table);
  save_phantom(ph, f.out);
  out << "phantom " << f.out << ": dims " << ph.dims.nx << ' ' << ph.dims.ny << ' ' << ph.dims.nz
      << ", tissue voxels " << ph.voxels.size() - ph.count(0) << ", fibroglandular share "
      << text::report(fibroglandular_share(ph)) << '\n';
  return ok;
}

inline int cmd_simulate(const Config &c, const Flags &f, std::ostream &out, std::ostream &err) {
  const auto s = resolve_settings(c);
  if (f.out.empty())
    throw ConfigError({"simulate needs --out PATH for the phasor file"});
  const auto ph = make_phantom(s);
  const auto sim = solve_at(s, ph, s.distance_mm);
  PhasorFile pf;
  pf.field = sim.field;
  pf.meta["distance_mm"] = text::exact(s.distance_mm);
  pf.meta["density"] = text::exact(phantom_density(ph));
  pf.meta["source"] = fdtd::to_string(s.source.kind);
  pf.meta["config_hash"] = s.config_hash;
  write_phasors(f.out, pf);
  if (!sim.field.converged)
    err << "warning: steady state not reached within " << s.steady.max_periods << " periods\n";
  out << "phasors " << f.out << ": converged " << (sim.field.converged ? "true" : "false") << ", periods "
      << sim.field.periods << ", radiated power " << text::report(sim.field.radiated_power) << " W\n";
  return ok;
}

inline int cmd_sar(const Config &c, const Flags &f, std::ostream &out) {
  const auto s = resolve_settings(c, {"phasor_file"});
  std::map<std::string, std::string> meta;
  const auto field = load_field(c, meta);
  const auto ph = make_phantom(s);
  const auto u = unit_sar(field, ph, s.validity);
  const auto rows = power_rows(s, u, ph, meta_number(meta, "distance_mm"), meta_number(meta, "density"));
  if (!c.raw("sar_file").empty())
    write_field(c.raw("sar_file"), ph.dims, ph.resolution, "point_sar_at_" + text::exact(s.power_w) + "W", "W/kg",
                sar::scaled(u.point, s.power_w).values);
  Output o(f.out, out);
  write_provenance(o.stream(), "sar", c);
  o.stream() << csv_columns << '\n';
  for (const auto &r : rows)
    write_row(o.stream(), r);
  return ok;
}

inline int cmd_bioheat(const Config &c, const Flags &f, std::ostream &out) {
  const auto s = resolve_settings(c, {"phasor_file"});
  std::map<std::string, std::string> meta;
  const auto field = load_field(c, meta);
  const auto ph = make_phantom(s);
  const auto cal = fdtd::calibrate_power(field, s.power_w);
  const auto point = sar::point_sar(cal, ph, {false, true});
  const auto res = bioheat::run_exposure(ph, point.values, s.duration, s.thermal);
  if (!c.raw("temperature_file").empty())
    write_field(c.raw("temperature_file"), ph.dims, ph.resolution, "temperature", "K", res.state.temperature);
  Output o(f.out, out);
  write_provenance(o.stream(), "bioheat", c);
  using text::exact;
  o.stream() << "time_s,power_w,peak_delta_t_k,mean_delta_t_k,peak_i,peak_j,peak_k,dt_s,steps\n";
  o.stream() << exact(res.state.time) << ',' << exact(s.power_w) << ',' << exact(res.peak_rise) << ','
             << exact(res.mean_rise) << ',' << res.peak_voxel.i << ',' << res.peak_voxel.j << ','
             << res.peak_voxel.k << ',' << exact(res.dt) << ',' << res.steps << '\n';
  return ok;
}

inline int cmd_sweep(const Config &c, const Flags &f, std::ostream &out, std::ostream &err) {
  const auto s = resolve_settings(c);
  const auto rows = run_sweep(s, [&](double d, double rho, int periods, bool conv) {
    err << "info: solved distance " << text::report(d) << " mm, density " << text::report(rho) << " in "
        << periods << " periods" << (conv ? "" : " (not converged)") << '\n';
  });
  Output o(f.out, out);
  write_provenance(o.stream(), "sweep", c);
  o.stream() << csv_columns << '\n';
  for (const auto &r : rows)
    write_row(o.stream(), r);
  return ok;
}

inline int fail(std::ostream &err, const char *code, const std::string &msg, int exit_code) {
  std::string one_line = msg;
  for (auto &ch : one_line)
    if (ch == '\n')
      ch = ' ';
  err << "error: " << code << ": " << one_line << '\n';
  return exit_code;
}

} // namespace detail

inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  CLI::App app{"voxsar: voxel FDTD microwave dosimetry (SAR and bioheat)"};
  app.require_subcommand(1, 1);
  Flags f;
  const char *names[] = {"phantom-gen", "simulate", "sar", "bioheat", "sweep"};
  const char *help[] = {"generate a procedural breast phantom", "run the FDTD solve and save phasors",
                        "SAR, averaging and compliance from saved phasors", "Pennes exposure from saved phasors",
                        "full distance x power x density study"};
  std::vector<CLI::App *> subs;
  for (int n = 0; n < 5; ++n) {
    auto *sub = app.add_subcommand(names[n], help[n]);
    sub->add_option("--config", f.config, "key = value config file");
    sub->add_option("--out", f.out, "output path");
    sub->add_option("--threads", f.threads, "worker threads (0 = runtime default)");
    sub->add_option("--seed", f.seed, "phantom seed");
    sub->add_option("--distances", f.distances, "comma-separated distances in mm");
    sub->add_option("--powers", f.powers, "comma-separated powers in W ('none' clears)");
    sub->add_option("--powers-dbm", f.powers_dbm, "comma-separated powers in dBm ('none' clears)");
    sub->add_option("--densities", f.densities, "comma-separated fibroglandular fractions");
    sub->add_option("--frequency", f.frequency, "excitation frequency in GHz");
    sub->add_option("--set", f.sets, "key=value override (repeatable)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      for (auto *sub : subs)
        if (sub->parsed())
          out << sub->help();
      return ok;
    }
    return detail::fail(err, "usage", e.what(), usage);
  }

  try {
    if (f.threads < 0)
      throw ConfigError({"--threads must be >= 0"});
#if defined(_OPENMP)
    if (f.threads > 0)
      omp_set_num_threads(f.threads);
#endif
    const Config c = detail::build_config(f);
    if (subs[0]->parsed())
      return detail::cmd_phantom_gen(c, f, out);
    if (subs[1]->parsed())
      return detail::cmd_simulate(c, f, out, err);
    if (subs[2]->parsed())
      return detail::cmd_sar(c, f, out);
    if (subs[3]->parsed())
      return detail::cmd_bioheat(c, f, out);
    return detail::cmd_sweep(c, f, out, err);
  } catch (const ConfigError &e) {
    return detail::fail(err, "config", e.what(), usage);
  } catch (const PhantomFormatError &e) {
    return detail::fail(err, "phantom_format", e.what(), input);
  } catch (const fdtd::StabilityError &e) {
    return detail::fail(err, "unstable", e.what(), unstable);
  } catch (const InvalidArgument &e) {
    return detail::fail(err, "invalid_argument", e.what(), invalid);
  } catch (const UnreachableFraction &e) {
    return detail::fail(err, "invalid_argument", e.what(), invalid);
  } catch (const Error &e) {
    return detail::fail(err, "io", e.what(), input);
  } catch (const std::exception &e) {
    return detail::fail(err, "internal", e.what(), failure);
  }
}

} // namespace voxsar::cli
