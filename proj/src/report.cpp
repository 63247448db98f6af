#include "gha/report.hpp"

#include <cstdio>
#include <sstream>

namespace gha::report {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json to_json(const GpaParams& params) {
  return {{"max_iters", params.max_iters}, {"tol", params.tol}};
}

}  // namespace

json to_json(const HyperParams& params) {
  return {{"features", params.features},
          {"tau", params.tau},
          {"max_iters", params.max_iters},
          {"mu", params.mu},
          {"batch_fraction", params.batch_fraction},
          {"seed", params.seed},
          {"nonlinearity", "logcosh"},
          {"trace_objective", params.trace_objective}};
}

json to_json(const SvmParams& params) {
  return {{"lambda", params.lambda}, {"epochs", params.epochs}};
}

json to_json(const CvReport& report) {
  json folds = json::array();
  for (const auto& fold : report.per_fold) {
    folds.push_back({{"held_out_subject", fold.held_out_subject},
                     {"accuracy", fold.accuracy},
                     {"isc_aligned", fold.isc_aligned},
                     {"align_seconds", fold.align_seconds},
                     {"train_seconds", fold.train_seconds},
                     {"test_seconds", fold.test_seconds}});
  }
  json out = {{"method", to_string(report.method)},
              {"seed", report.seed},
              {"num_classes", report.num_classes},
              {"chance", report.chance},
              {"mean_accuracy", report.mean_accuracy},
              {"std_accuracy", report.std_accuracy},
              {"mean_isc_aligned", report.mean_isc_aligned},
              {"align_params", to_json(report.align_params)},
              {"svm_params", to_json(report.svm_params)},
              {"per_fold", folds}};
  if (report.method == Method::Gpa) out["gpa_params"] = to_json(report.gpa_params);
  return out;
}

json to_json(const SweepResult& result) {
  json points = json::array();
  for (const auto& p : result.points) {
    points.push_back({{"value", p.value},
                      {"mean_accuracy", p.mean_accuracy},
                      {"std_accuracy", p.std_accuracy},
                      {"mean_isc_aligned", p.mean_isc_aligned},
                      {"chance", p.report.chance},
                      {"seconds", p.seconds},
                      {"fingerprint", hex64(p.fingerprint)},
                      {"report", to_json(p.report)}});
  }
  return {{"axis", to_string(result.axis)},
          {"method", to_string(result.method)},
          {"grid", result.grid},
          {"seed", result.seed},
          {"fingerprint", hex64(result.fingerprint)},
          {"base_params", to_json(result.base_params)},
          {"svm_params", to_json(result.svm_params)},
          {"gpa_params", to_json(result.gpa_params)},
          {"points", points}};
}

json to_json(const std::vector<BenchRow>& rows, std::size_t repeats, std::uint64_t seed) {
  json out_rows = json::array();
  for (const auto& r : rows) {
    out_rows.push_back({{"method", to_string(r.method)},
                        {"size", r.size.label()},
                        {"S", r.size.subjects},
                        {"T", r.size.timepoints},
                        {"V", r.size.voxels},
                        {"F", r.size.features},
                        {"median_seconds", r.median_seconds},
                        {"seconds_ratio_to_gradha", r.seconds_ratio_to_gradha},
                        {"repeat_seconds", r.repeat_seconds},
                        {"iterations", r.iterations}});
  }
  return {{"repeats", repeats}, {"seed", seed}, {"rows", out_rows}};
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << to_string(result.axis) << ",mean_accuracy,std_accuracy,mean_isc_aligned,chance,seconds\n";
  for (const auto& p : result.points) {
    out << p.value << ',' << p.mean_accuracy << ',' << p.std_accuracy << ','
        << p.mean_isc_aligned << ',' << p.report.chance << ',' << p.seconds << '\n';
  }
  return out.str();
}

json strip_timing(const json& report) {
  if (report.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : report.items()) {
      if (key.find("seconds") != std::string::npos) continue;
      out[key] = strip_timing(value);
    }
    return out;
  }
  if (report.is_array()) {
    json out = json::array();
    for (const auto& v : report) out.push_back(strip_timing(v));
    return out;
  }
  return report;
}

}  // namespace gha::report
