#pragma once

// Stateless HTTP facade. Handlers are plain functions from a request body to
// (status, JSON) so they can be exercised without a socket; mount() wires
// them onto a cpp-httplib server.

#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "bwmodel/report.hpp"
#include "bwmodel/requests.hpp"
#include "bwmodel/version.hpp"

namespace bwmodel {

enum class ApiErrorCode { bad_request, infeasible, no_crossover, internal };

inline std::string_view to_string(ApiErrorCode c) {
  switch (c) {
    case ApiErrorCode::bad_request: return "bad_request";
    case ApiErrorCode::infeasible: return "infeasible";
    case ApiErrorCode::no_crossover: return "no_crossover";
    case ApiErrorCode::internal: return "internal";
  }
  return "internal";
}

struct ApiError {
  ApiErrorCode code = ApiErrorCode::internal;
  std::string message;
  nlohmann::json detail = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"code", std::string(to_string(code))},
            {"message", message.empty() ? std::string("error") : message},
            {"detail", detail}};
  }
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  ConfigDocument base;                     ///< defaults layered under every request
  std::optional<std::string> cors_origin;  ///< Access-Control-Allow-Origin, if set
};

/// Maps the model's exceptions onto ApiError bodies.
template <class F>
ApiResponse guarded(F&& handler) {
  auto fail = [](int status, ApiErrorCode code, std::string msg, nlohmann::json detail = nlohmann::json::object()) {
    return ApiResponse{status, ApiError{code, std::move(msg), std::move(detail)}.to_json()};
  };
  try {
    return handler();
  } catch (const InfeasibleError& e) {
    return fail(422, ApiErrorCode::infeasible, e.what(),
                {{"minimum_budget", format_power(e.minimum_budget())}});
  } catch (const NoCrossoverError& e) {
    return fail(422, ApiErrorCode::no_crossover, e.what(),
                {{"a_below_at_lo", e.a_below_at_lo()}, {"a_below_at_hi", e.a_below_at_hi()}});
  } catch (const InvalidInputError& e) {
    return fail(400, ApiErrorCode::bad_request, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(400, ApiErrorCode::bad_request, e.what());
  } catch (const std::exception& e) {
    return fail(500, ApiErrorCode::internal, e.what());
  }
}

class ApiService {
 public:
  explicit ApiService(ServiceOptions options = {}) : options_(std::move(options)) {
    resolve(options_.base);  // reject a bad base config up front
  }

  [[nodiscard]] ApiResponse presets() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& name : preset_names()) {
      auto p = preset_system(name);
      list.push_back({{"system", to_json(p.system)}, {"shared", to_json(p.shared)}});
    }
    return {200, list};
  }

  [[nodiscard]] ApiResponse evaluate(std::string_view body) const {
    return guarded([&] {
      auto req = evaluate_request_from_json(parse_body(body));
      auto result = run_evaluate(options_.base, req);
      return ApiResponse{200, to_json(result, req.system, req.mode)};
    });
  }

  [[nodiscard]] ApiResponse sweep(std::string_view body) const {
    return guarded([&] {
      auto req = sweep_request_from_json(parse_body(body));
      auto rows = run_sweep(options_.base, req);
      nlohmann::json out;
      out["variable"] = std::string(to_string(req.variable));
      out["mode"] = std::string(to_string(to_spec(req).mode));
      out["columns"] = csv_columns();
      out["rows"] = nlohmann::json::array();
      for (const auto& r : rows) out["rows"].push_back(sweep_row_json(r));
      return ApiResponse{200, out};
    });
  }

  [[nodiscard]] ApiResponse crossover(std::string_view body) const {
    return guarded([&] {
      auto req = crossover_request_from_json(parse_body(body));
      auto r = run_crossover(options_.base, req);
      return ApiResponse{200, to_json(r, req.a, req.b)};
    });
  }

  [[nodiscard]] static ApiResponse healthz() {
    return {200, {{"status", "ok"}, {"name", "bwmodel"}, {"version", kVersion}}};
  }

  void mount(httplib::Server& server) const {
    auto reply = [this](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
      if (options_.cors_origin) res.set_header("Access-Control-Allow-Origin", *options_.cors_origin);
    };
    server.Get("/healthz", [reply](const httplib::Request&, httplib::Response& res) { reply(res, healthz()); });
    server.Get("/api/presets",
               [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, presets()); });
    server.Post("/api/evaluate", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, evaluate(req.body));
    });
    server.Post("/api/sweep", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, sweep(req.body));
    });
    server.Post("/api/crossover", [this, reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, crossover(req.body));
    });
    if (options_.cors_origin) {
      server.Options(R"(/.*)", [this](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", *options_.cors_origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      });
    }
    server.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      ApiError e{res.status >= 500 ? ApiErrorCode::internal : ApiErrorCode::bad_request,
                 "HTTP " + std::to_string(res.status)};
      const int status = res.status;
      reply(res, ApiResponse{status, e.to_json()});
    });
  }

 private:
  static nlohmann::json parse_body(std::string_view body) {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInputError(std::string("request body is not valid JSON: ") + e.what());
    }
  }

  ServiceOptions options_;
};

}  // namespace bwmodel
