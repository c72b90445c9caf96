#pragma once

// Command-line front end. Exit codes: 0 ok, 2 bad arguments, 3 infeasible
// provisioning, 4 no crossover in range, 5 cannot bind the listen address.
// Errors are also written to stderr as one ApiError JSON line.

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bwmodel/service.hpp"

namespace bwmodel::cli {

enum ExitCode : int {
  kOk = 0,
  kBadArguments = 2,
  kInfeasible = 3,
  kNoCrossover = 4,
  kBindFailure = 5,
};

struct CommonOptions {
  std::string config_path;
  std::string db_size;
  std::string accessed;  ///< "20%", "20" (percent) or a size such as "3.2TB"
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Folds the shared workload flags into overrides for the request layer.
inline void apply_common(const CommonOptions& o, ConfigDocument& base, ConfigDocument& overrides,
                         WorkloadAdjust& adjust) {
  if (!o.config_path.empty()) base = load_config(o.config_path);
  if (!o.db_size.empty()) overrides.workload.db_size = parse_bytes(o.db_size);
  if (!o.accessed.empty()) {
    auto t = detail::trim(o.accessed);
    bool is_size = !t.empty() && (t.back() == 'b' || t.back() == 'B');
    if (is_size) {
      adjust.bytes_accessed = parse_bytes(t);
    } else {
      if (!t.empty() && t.back() == '%') t.remove_suffix(1);
      overrides.workload.percent_accessed = parse_number(t);
    }
  }
}

inline void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON config file overriding presets");
  cmd->add_option("--db-size", o.db_size, "database size, e.g. 16TB");
  cmd->add_option("--accessed", o.accessed, "bytes touched per query: percent (20%) or size (3.2TB)");
}

inline int report_error(std::ostream& err, ApiErrorCode code, const std::string& msg,
                        nlohmann::json detail = nlohmann::json::object()) {
  err << ApiError{code, msg, std::move(detail)}.to_json().dump() << "\n";
  switch (code) {
    case ApiErrorCode::infeasible: return kInfeasible;
    case ApiErrorCode::no_crossover: return kNoCrossover;
    default: return kBadArguments;
  }
}

inline int serve(const std::string& listen, const ServiceOptions& options, std::ostream& out, std::ostream& err) {
  auto colon = listen.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : listen.substr(0, colon);
  std::string port_text = colon == std::string::npos ? listen : listen.substr(colon + 1);
  int port = 0;
  try {
    double p = parse_number(port_text);
    // port 0 picks a free port
    if (p != static_cast<int>(p) || p < 0 || p > 65535) throw InvalidInputError("port out of range");
    port = static_cast<int>(p);
  } catch (const InvalidInputError&) {
    err << ApiError{ApiErrorCode::bad_request, "invalid listen port '" + port_text + "'"}.to_json().dump() << "\n";
    return kBindFailure;
  }

  ApiService service(options);
  httplib::Server server;
  service.mount(server);
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // share a port that is already taken
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);

  const bool bound = port == 0 ? (port = server.bind_to_any_port(host)) > 0 : server.bind_to_port(host, port);
  if (!bound) {
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    err << ApiError{ApiErrorCode::internal, "cannot bind " + host + ":" + std::to_string(port)}.to_json().dump()
        << "\n";
    return kBindFailure;
  }
  out << "listening on " << host << ":" << port << std::endl;

  std::atomic<bool> finished{false};
  std::thread waiter([&] {
    const timespec tick{0, 100'000'000};
    while (!finished.load()) {
      if (sigtimedwait(&stop_signals, nullptr, &tick) > 0) {
        server.stop();
        return;
      }
    }
  });
  server.listen_after_bind();
  finished = true;
  waiter.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytical model of bandwidth-bound in-memory clusters", "bwmodel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // evaluate
  struct {
    CommonOptions common;
    std::string system, mode = "capacity", sla, budget, policy = "full", format = "table";
  } ev;
  auto* evaluate = app.add_subcommand("evaluate", "provision one system and print design and metrics");
  evaluate->add_option("--system", ev.system, "system name")->required();
  evaluate->add_option("--mode", ev.mode, "performance | power | capacity");
  evaluate->add_option("--sla", ev.sla, "response-time SLA, e.g. 10ms");
  evaluate->add_option("--budget", ev.budget, "power budget, e.g. 1MW");
  evaluate->add_option("--core-policy", ev.policy, "power mode cores: full | matched");
  evaluate->add_option("--format", ev.format, "table | csv | json");
  add_common(evaluate, ev.common);

  // sweep
  struct {
    CommonOptions common;
    std::string var, values, log_range, systems = "traditional,big-memory,die-stacked", mode, sla, budget,
        policy = "full", format = "csv";
  } sw;
  auto* sweep = app.add_subcommand("sweep", "provision systems over a range of one variable (CSV)");
  sweep->add_option("--var", sw.var, "sla | budget | db-size | accessed | fraction")->required();
  sweep->add_option("--values", sw.values, "comma-separated values, e.g. 10ms,100ms,1s");
  sweep->add_option("--log-range", sw.log_range, "start:stop:points, log spaced");
  sweep->add_option("--systems", sw.systems, "comma-separated system names");
  sweep->add_option("--mode", sw.mode, "performance | power | capacity | memory-wall");
  sweep->add_option("--sla", sw.sla, "fixed SLA for performance mode");
  sweep->add_option("--budget", sw.budget, "fixed budget for power mode");
  sweep->add_option("--core-policy", sw.policy, "power mode cores: full | matched");
  sweep->add_option("--format", sw.format, "csv | json");
  add_common(sweep, sw.common);

  // crossover
  struct {
    CommonOptions common;
    std::string a = "traditional", b = "die-stacked", range = "1ms:10s", metric = "total_power", format = "table";
    std::optional<double> accessed_percent;
    double density = 1.0, core_power = 1.0;
  } cx;
  auto* crossover = app.add_subcommand("crossover", "find the SLA where two systems' power curves cross");
  crossover->add_option("--a", cx.a, "first system");
  crossover->add_option("--b", cx.b, "second system");
  crossover->add_option("--accessed-percent", cx.accessed_percent, "percent of the database each query reads");
  crossover->add_option("--density-factor", cx.density, "scale module capacity of every system");
  crossover->add_option("--core-power-factor", cx.core_power, "scale per-core power");
  crossover->add_option("--range", cx.range, "SLA search range lo:hi");
  crossover->add_option("--metric", cx.metric, "total_power | energy_per_query");
  crossover->add_option("--format", cx.format, "table | json");
  add_common(crossover, cx.common);

  // report
  struct {
    CommonOptions common;
    std::string kind, systems = "traditional,big-memory,die-stacked", budget = "1MW", policy = "full",
        format = "table";
  } rp;
  auto* report = app.add_subcommand("report", "energy per query or power breakdown per system");
  report->add_option("kind", rp.kind, "energy | breakdown")->required();
  report->add_option("--systems", rp.systems, "comma-separated system names");
  report->add_option("--budget", rp.budget, "power budget for the breakdown");
  report->add_option("--core-policy", rp.policy, "full | matched");
  report->add_option("--format", rp.format, "table | csv | json");
  add_common(report, rp.common);

  // config
  std::string cfg_in, cfg_out;
  auto* config = app.add_subcommand("config", "print or write the fully resolved config document");
  config->add_option("--config", cfg_in, "config file to resolve");
  config->add_option("--out", cfg_out, "write to this file instead of stdout");

  // serve
  std::string listen = "127.0.0.1:8080", serve_config, cors;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
  serve_cmd->add_option("--listen", listen, "address:port");
  serve_cmd->add_option("--config", serve_config, "config file applied to every request");
  serve_cmd->add_option("--cors-origin", cors, "allowed browser origin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, ApiErrorCode::bad_request, e.what());
  }

  auto check_format = [](const std::string& f, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
      if (f == a) return;
    }
    throw InvalidInputError("unsupported --format '" + f + "'");
  };

  try {
    if (*evaluate) {
      check_format(ev.format, {"table", "csv", "json"});
      ConfigDocument base;
      EvaluateRequest req;
      apply_common(ev.common, base, req.overrides, req.adjust);
      req.system = ev.system;
      req.mode = parse_mode(ev.mode);
      if (!ev.sla.empty()) req.sla = parse_time(ev.sla);
      if (!ev.budget.empty()) req.power_budget = parse_power(ev.budget);
      req.core_policy = parse_core_policy(ev.policy);
      auto result = run_evaluate(base, req);
      if (ev.format == "json") {
        out << to_json(result, req.system, req.mode).dump(2) << "\n";
      } else if (ev.format == "csv") {
        auto ctx = resolve_with(base, req.overrides, req.adjust);
        SweepRow row{req.system, SweepVariable::db_size, ctx.workload.db_size.value(), true, result.design,
                     result.metrics, ""};
        if (req.mode == Mode::performance) {
          row.variable = SweepVariable::sla;
          row.value = req.sla->value();
        } else if (req.mode == Mode::power) {
          row.variable = SweepVariable::power_budget;
          row.value = req.power_budget->value();
        }
        out << csv_header() << "\n" << csv_row(row) << "\n";
      } else {
        write_table(out, result, req.system, req.mode);
      }
      return kOk;
    }

    if (*sweep) {
      check_format(sw.format, {"csv", "json"});
      ConfigDocument base;
      SweepRequest req;
      apply_common(sw.common, base, req.overrides, req.adjust);
      req.variable = parse_sweep_variable(sw.var);
      if (sw.values.empty() == sw.log_range.empty()) {
        throw InvalidInputError("give exactly one of --values or --log-range");
      }
      if (!sw.values.empty()) {
        for (const auto& v : split(sw.values, ',')) req.values.push_back(parse_sweep_value(v, req.variable));
      } else {
        auto parts = split(sw.log_range, ':');
        if (parts.size() != 3) throw InvalidInputError("--log-range expects start:stop:points");
        double points = parse_number(parts[2]);
        if (points != static_cast<int>(points) || points < 1 || points > static_cast<double>(kMaxSweepPoints)) {
          throw InvalidInputError("--log-range points must be an integer in [1, 10000]");
        }
        req.values = log_space(parse_sweep_value(parts[0], req.variable), parse_sweep_value(parts[1], req.variable),
                               static_cast<int>(points));
      }
      req.systems = split(sw.systems, ',');
      if (!sw.mode.empty()) req.mode = parse_sweep_mode(sw.mode);
      if (!sw.sla.empty()) req.sla = parse_time(sw.sla);
      if (!sw.budget.empty()) req.power_budget = parse_power(sw.budget);
      req.core_policy = parse_core_policy(sw.policy);
      auto rows = run_sweep(base, req);
      if (sw.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) j.push_back(sweep_row_json(r));
        out << j.dump(2) << "\n";
      } else {
        write_csv(out, rows);
      }
      return kOk;
    }

    if (*crossover) {
      check_format(cx.format, {"table", "json"});
      ConfigDocument base;
      CrossoverRequest req;
      apply_common(cx.common, base, req.overrides, req.adjust);
      req.a = cx.a;
      req.b = cx.b;
      req.metric = parse_crossover_metric(cx.metric);
      req.accessed_percent = cx.accessed_percent;
      req.density_factor = cx.density;
      req.core_power_factor = cx.core_power;
      auto parts = split(cx.range, ':');
      if (parts.size() != 2) throw InvalidInputError("--range expects lo:hi, e.g. 1ms:10s");
      req.lo = parse_time(parts[0]);
      req.hi = parse_time(parts[1]);
      auto r = run_crossover(base, req);
      if (cx.format == "json") {
        out << to_json(r, req.a, req.b).dump(2) << "\n";
      } else {
        out << req.a << " vs " << req.b << " " << to_string(r.metric) << " crossover at SLA "
            << humanize(r.crossover_value.value(), QuantityKind::time) << " (bracket "
            << humanize(r.bracket_lo.value(), QuantityKind::time) << " .. "
            << humanize(r.bracket_hi.value(), QuantityKind::time) << ")\n";
        out << "  below: " << (r.a_below_at_lo ? req.a : req.b) << " is lower; above: "
            << (r.a_below_at_hi ? req.a : req.b) << " is lower\n";
      }
      return kOk;
    }

    if (*report) {
      check_format(rp.format, {"table", "csv", "json"});
      ConfigDocument base, overrides;
      WorkloadAdjust adjust;
      apply_common(rp.common, base, overrides, adjust);
      auto ctx = resolve_with(base, overrides, adjust);
      auto names = split(rp.systems, ',');
      if (rp.kind == "energy") {
        auto rows = energy_report(ctx.systems, names, ctx.shared, ctx.workload);
        nlohmann::json j = nlohmann::json::array();
        if (rp.format == "csv") out << "system,energy_j,response_time_s,total_power_w\n";
        for (const auto& r : rows) {
          if (rp.format == "csv") {
            out << r.system << "," << format_number(r.energy_per_query.value()) << ","
                << format_number(r.response_time.value()) << "," << format_number(r.total_power.value()) << "\n";
          } else if (rp.format == "json") {
            j.push_back({{"system", r.system},
                         {"energy_per_query", format_energy(r.energy_per_query)},
                         {"response_time", format_time(r.response_time)},
                         {"total_power", format_power(r.total_power)}});
          } else {
            out << std::left << std::setw(14) << r.system << humanize(r.energy_per_query.value(), QuantityKind::energy)
                << "  (" << humanize(r.response_time.value(), QuantityKind::time) << " at "
                << humanize(r.total_power.value(), QuantityKind::power) << ")\n";
          }
        }
        if (rp.format == "json") out << j.dump(2) << "\n";
      } else if (rp.kind == "breakdown") {
        auto rows = power_breakdown(ctx.systems, names, ctx.shared, ctx.workload, parse_power(rp.budget),
                                    parse_core_policy(rp.policy));
        nlohmann::json j = nlohmann::json::array();
        if (rp.format == "csv") out << "system,feasible,compute_percent,memory_percent,overhead_percent\n";
        for (const auto& r : rows) {
          if (rp.format == "csv") {
            out << r.system << "," << (r.feasible ? "true" : "false") << ","
                << (r.feasible ? format_number(r.compute_percent) : "") << ","
                << (r.feasible ? format_number(r.memory_percent) : "") << ","
                << (r.feasible ? format_number(r.overhead_percent) : "") << "\n";
          } else if (rp.format == "json") {
            j.push_back({{"system", r.system},
                         {"feasible", r.feasible},
                         {"compute_percent", r.compute_percent},
                         {"memory_percent", r.memory_percent},
                         {"overhead_percent", r.overhead_percent}});
          } else if (r.feasible) {
            out << std::left << std::setw(14) << r.system << std::setprecision(3) << "compute "
                << r.compute_percent << "%  memory " << r.memory_percent << "%  overhead " << r.overhead_percent
                << "%\n";
          } else {
            out << std::left << std::setw(14) << r.system << "infeasible: " << r.reason << "\n";
          }
        }
        if (rp.format == "json") out << j.dump(2) << "\n";
      } else {
        throw InvalidInputError("unknown report '" + rp.kind + "' (valid: energy, breakdown)");
      }
      return kOk;
    }

    if (*config) {
      ConfigDocument doc = cfg_in.empty() ? ConfigDocument{} : load_config(cfg_in);
      auto full = document_from(resolve(doc));
      if (cfg_out.empty()) {
        out << to_json(full).dump(2) << "\n";
      } else {
        save_config(cfg_out, full);
      }
      return kOk;
    }

    if (*serve_cmd) {
      ServiceOptions opts;
      if (!serve_config.empty()) opts.base = load_config(serve_config);
      if (!cors.empty()) opts.cors_origin = cors;
      return serve(listen, opts, out, err);
    }
  } catch (const InfeasibleError& e) {
    return report_error(err, ApiErrorCode::infeasible, e.what(), {{"minimum_budget", format_power(e.minimum_budget())}});
  } catch (const NoCrossoverError& e) {
    return report_error(err, ApiErrorCode::no_crossover, e.what(),
                        {{"a_below_at_lo", e.a_below_at_lo()}, {"a_below_at_hi", e.a_below_at_hi()}});
  } catch (const InvalidInputError& e) {
    return report_error(err, ApiErrorCode::bad_request, e.what());
  }
  return kBadArguments;
}

}  // namespace bwmodel::cli
