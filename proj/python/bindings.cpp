#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wificue/core/error.hpp"
#include "wificue/core/observation.hpp"
#include "wificue/ingest/scan_ingest.hpp"
#include "wificue/oui/registry.hpp"
#include "wificue/recommend/recommender.hpp"
#include "wificue/service/api.hpp"

namespace py = pybind11;
using namespace wificue;

namespace {

service::Clock clock_for(const std::optional<std::string>& now) {
  if (!now) return now_utc;
  const auto t = parse_rfc3339(*now);
  return [t] { return t; };
}

std::optional<std::filesystem::path> opt_path(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::filesystem::path(*s);
}

ingest::ScanBatch batch_from_text(const std::string& text, Timestamp now) {
  std::istringstream in(text);
  auto parsed = ingest::parse_canonical(in, ingest::ParseMode::kStrict, now);
  if (parsed.observations.empty()) throw Error(ErrorCode::kEmptyBatch, "scan has no observations");
  auto batch = ingest::normalize(ingest::ScanBatch{"", std::move(parsed.observations), now});
  batch.scan_id = service::scan_id_for(batch);
  return batch;
}

// Holds the service and its options; requests go through the same
// dispatcher the HTTP adapter uses.
class PyService {
 public:
  PyService(const std::string& db, std::optional<std::string> oui, std::optional<std::string> deny_list,
            std::optional<std::string> baselines_dir, std::optional<std::string> wigle_fixtures,
            std::optional<std::string> api_token, std::optional<std::string> now) {
    service::ServiceOptions o;
    o.workspace.db = db;
    o.workspace.oui = opt_path(oui);
    o.workspace.deny_list = opt_path(deny_list);
    o.workspace.wigle_fixtures = opt_path(wigle_fixtures);
    o.workspace.clock = clock_for(now);
    o.baselines_dir = opt_path(baselines_dir);
    o.api_token = std::move(api_token);
    svc_ = std::make_unique<service::Service>(std::move(o));
  }

  std::pair<int, std::string> handle(const std::string& method, const std::string& path,
                                     const std::string& body,
                                     const std::map<std::string, std::string>& query,
                                     const std::map<std::string, std::string>& headers) {
    service::Request r{method, path, query, {}, body};
    for (const auto& [k, v] : headers) {
      std::string lower = k;
      for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      r.headers[lower] = v;
    }
    py::gil_scoped_release release;
    const auto resp = svc_->handle(r);
    return {resp.status, resp.body};
  }

 private:
  std::unique_ptr<service::Service> svc_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wi-Fi access point risk assessment";

  // args = (code, message), e.g. ("SCHEMA_VIOLATION", "field 'bssid': missing")
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&] { return py::object(py::exception<Error>(m, "Error", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error_type.get_stored().ptr(),
                      py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  m.def("parse_bssid", [](const std::string& text) { return parse_bssid(text).to_string(); },
        py::arg("text"));
  m.def(
      "classify_security",
      [](const std::string& caps) {
        const auto s = classify_security(caps);
        return py::make_tuple(std::string(to_string(s.security)), s.wps_advertised);
      },
      py::arg("capabilities"));
  m.def("is_locally_administered",
        [](const std::string& bssid) { return oui::is_locally_administered(parse_bssid(bssid)); },
        py::arg("bssid"));
  m.def(
      "identifiability_rate",
      [](const std::string& manuf_path, const std::string& scan_text) {
        const auto reg = oui::load_registry_file(manuf_path);
        return oui::identifiability_rate(reg, batch_from_text(scan_text, now_utc()));
      },
      py::arg("manuf_path"), py::arg("scan_text"));
  m.def(
      "community_signal",
      [](const std::string& reports_json, const std::string& now) {
        const auto t = parse_rfc3339(now);
        std::vector<recommend::FeedbackReport> reports;
        for (const auto& j : Json::parse(reports_json)) reports.push_back(recommend::feedback_from_json(j, t));
        return service::community_to_json(recommend::community_signal(reports, t)).dump();
      },
      py::arg("reports_json"), py::arg("now"));
  m.def(
      "assess",
      [](const std::string& scan_text, const std::string& posture, const std::string& db,
         std::optional<std::string> oui, std::optional<std::string> deny_list,
         std::optional<std::string> wigle_fixtures, std::optional<std::string> now) {
        const auto p = recommend::posture_from_string(posture);
        if (!p) throw Error(ErrorCode::kSchemaViolation, "unknown posture " + posture, "posture");
        service::WorkspaceOptions wo;
        wo.db = db;
        wo.oui = opt_path(oui);
        wo.deny_list = opt_path(deny_list);
        wo.wigle_fixtures = opt_path(wigle_fixtures);
        wo.clock = clock_for(now);
        const auto ws = service::open_workspace(wo);
        return service::assessment_document(*ws, batch_from_text(scan_text, wo.clock()), *p).dump();
      },
      py::arg("scan_text"), py::arg("posture") = "balanced", py::arg("db") = "",
      py::arg("oui") = py::none(), py::arg("deny_list") = py::none(),
      py::arg("wigle_fixtures") = py::none(), py::arg("now") = py::none());

  py::class_<PyService>(m, "Service")
      .def(py::init<const std::string&, std::optional<std::string>, std::optional<std::string>,
                    std::optional<std::string>, std::optional<std::string>,
                    std::optional<std::string>, std::optional<std::string>>(),
           py::arg("db"), py::arg("oui") = py::none(), py::arg("deny_list") = py::none(),
           py::arg("baselines_dir") = py::none(), py::arg("wigle_fixtures") = py::none(),
           py::arg("api_token") = py::none(), py::arg("now") = py::none())
      .def("handle", &PyService::handle, py::arg("method"), py::arg("path"), py::arg("body") = "",
           py::arg("query") = std::map<std::string, std::string>{},
           py::arg("headers") = std::map<std::string, std::string>{});
}
