// Command-line front end: synth, align, eval, sweep, bench.
#include "gha/baselines.hpp"
#include "gha/core.hpp"
#include "gha/dataset_io.hpp"
#include "gha/error.hpp"
#include "gha/experiments.hpp"
#include "gha/gradha.hpp"
#include "gha/mvpc.hpp"
#include "gha/report.hpp"
#include "gha/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct AlignFlags {
  std::string method = "gradha";
  std::size_t features = 0;
  double mu = 0.05;
  double tau = 1e-5;
  std::size_t max_iters = 500;
  double batch_fraction = 0.1;
  std::size_t gpa_iters = 50;
  double gpa_tol = 1e-10;

  gha::HyperParams params(std::uint64_t seed) const {
    gha::HyperParams p;
    p.features = features;
    p.mu = mu;
    p.tau = tau;
    p.max_iters = max_iters;
    p.batch_fraction = batch_fraction;
    p.seed = seed;
    return p;
  }
  gha::GpaParams gpa() const { return {gpa_iters, gpa_tol}; }
};

void add_align_flags(CLI::App* cmd, AlignFlags& flags, bool with_method = true) {
  if (with_method) {
    cmd->add_option("--method", flags.method, "Alignment method")
        ->check(CLI::IsMember({"gradha", "gpa", "pca", "none"}))
        ->capture_default_str();
  }
  cmd->add_option("--features", flags.features, "Feature count f (0 = min(T, V))")
      ->capture_default_str();
  cmd->add_option("--mu", flags.mu, "Learning rate")->capture_default_str();
  cmd->add_option("--tau", flags.tau, "Convergence threshold on size-normalized mapping change")
      ->capture_default_str();
  cmd->add_option("--max-iters", flags.max_iters, "Maximum iterations N")->capture_default_str();
  cmd->add_option("--batch-fraction", flags.batch_fraction, "Fraction of time points per step")
      ->capture_default_str();
  cmd->add_option("--gpa-iters", flags.gpa_iters, "GPA iteration cap")->capture_default_str();
  cmd->add_option("--gpa-tol", flags.gpa_tol, "GPA objective-decrease tolerance")
      ->capture_default_str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw gha::Error(gha::ErrorKind::Spec, "bad grid value '" + item + "'");
    grid.push_back(v);
  }
  return grid;
}

void write_json(const fs::path& path, const json& doc) {
  gha::io::write_file_atomic(path, doc.dump(2) + "\n");
}

int run_synth(const gha::SynthSpec& spec, const std::string& out) {
  const gha::Dataset data = gha::generate_synthetic(spec);
  gha::io::save_dataset(data, out);
  std::cout << "wrote " << data.size() << " subjects (" << spec.timepoints << "x" << spec.voxels
            << ", latent " << spec.latent_dim << ", " << spec.num_classes << " classes, seed "
            << spec.seed << ") to " << out << "\n";
  return 0;
}

int run_align(const std::string& data_dir, const AlignFlags& flags, std::uint64_t seed,
              const std::string& out) {
  const gha::Dataset data = gha::io::load_dataset(data_dir);
  const gha::Method method = gha::parse_method(flags.method);
  const fs::path dir(out);
  fs::create_directories(dir);

  json meta = {{"method", flags.method}, {"seed", seed}, {"subject_ids", json::array()}};
  for (const auto& s : data.subjects) meta["subject_ids"].push_back(s.subject_id);

  switch (method) {
    case gha::Method::GradHA:
    case gha::Method::Gpa: {
      const gha::HyperParams params = flags.params(seed);
      const gha::AlignmentModel model =
          method == gha::Method::GradHA
              ? gha::fit(data, params)
              : gha::fit_gpa(data, params.resolved_features(data.timepoints(), data.voxels()),
                             flags.gpa_iters, flags.gpa_tol);
      for (std::size_t i = 0; i < data.size(); ++i) {
        gha::io::write_matrix(dir / ("mapping_" + data.subjects[i].subject_id + ".gha"),
                              model.mappings[i].matrix);
      }
      gha::io::write_matrix(dir / "template.gha", model.tmpl.matrix);
      meta["params"] = gha::report::to_json(model.params);
      if (method == gha::Method::Gpa) meta["gpa_params"] = {{"max_iters", flags.gpa_iters}, {"tol", flags.gpa_tol}};
      meta["iterations_run"] = model.iterations_run;
      meta["converged"] = model.converged;
      meta["objective_trace"] = model.objective_trace;
      std::vector<gha::Matrix> aligned;
      for (std::size_t i = 0; i < data.size(); ++i) {
        aligned.push_back(gha::standardize_columns(data.subjects[i].matrix) *
                          model.mappings[i].matrix);
      }
      meta["mean_pairwise_isc"] = gha::mean_pairwise_isc(aligned);
      std::cout << flags.method << ": " << model.iterations_run << " iterations, converged="
                << (model.converged ? "true" : "false") << ", mean pairwise ISC "
                << meta["mean_pairwise_isc"].get<double>() << "\n";
      break;
    }
    case gha::Method::Pca: {
      const std::size_t f = flags.params(seed).resolved_features(data.timepoints(), data.voxels());
      for (const auto& s : data.subjects) {
        const auto pca = gha::pca_reduce(gha::standardize_columns(s.matrix), f);
        gha::io::write_matrix(dir / ("mapping_" + s.subject_id + ".gha"), pca.projection.matrix);
      }
      meta["params"] = {{"features", f}};
      meta["note"] = "per-subject PCA projections; no shared space or template";
      std::cout << "pca: wrote " << data.size() << " per-subject projections\n";
      break;
    }
    case gha::Method::None: {
      gha::Matrix mean = gha::Matrix::Zero(data.timepoints(), data.voxels());
      for (const auto& s : data.subjects) mean += gha::standardize_columns(s.matrix);
      mean /= static_cast<double>(data.size());
      gha::io::write_matrix(dir / "template.gha", mean);
      meta["note"] = "identity mappings; template is the mean standardized subject";
      std::cout << "none: wrote mean standardized template\n";
      break;
    }
  }
  write_json(dir / "params.json", meta);
  return 0;
}

int run_eval(const std::string& data_dir, const AlignFlags& flags, const gha::SvmParams& svm,
             std::uint64_t seed, const std::string& report_path) {
  const gha::Dataset data = gha::io::load_dataset(data_dir);
  const gha::CvReport report = gha::loso_cv(data, gha::parse_method(flags.method),
                                            flags.params(seed), svm, seed, flags.gpa());
  json doc = gha::report::to_json(report);
  doc["dataset_fingerprint"] = [&] {
    std::ostringstream hex;
    hex << std::hex << gha::io::fingerprint(data);
    return hex.str();
  }();
  write_json(report_path, doc);
  std::cout << flags.method << ": mean accuracy " << report.mean_accuracy << " +/- "
            << report.std_accuracy << " (chance " << report.chance << "), mean ISC "
            << report.mean_isc_aligned << "\n";
  return 0;
}

int run_sweep(const std::string& data_dir, const std::string& axis, const std::string& grid,
              const AlignFlags& flags, const gha::SvmParams& svm, std::uint64_t seed,
              const std::string& report_path, const std::string& csv_path) {
  const gha::Dataset data = gha::io::load_dataset(data_dir);
  const gha::SweepResult result =
      gha::run_sweep(data, gha::parse_method(flags.method), gha::parse_axis(axis),
                     parse_grid(grid), flags.params(seed), svm, seed, flags.gpa());
  write_json(report_path, gha::report::to_json(result));
  if (!csv_path.empty()) gha::io::write_file_atomic(csv_path, gha::report::sweep_csv(result));
  for (const auto& p : result.points) {
    std::cout << gha::to_string(result.axis) << " " << p.value << ": " << p.mean_accuracy
              << " +/- " << p.std_accuracy << "\n";
  }
  return 0;
}

int run_bench(const std::string& sizes_text, const std::string& methods_text,
              std::size_t repeats, std::uint64_t seed, const AlignFlags& flags,
              const std::string& report_path) {
  std::vector<gha::BenchSize> sizes;
  for (const auto& s : split_list(sizes_text)) sizes.push_back(gha::parse_bench_size(s));
  std::vector<gha::Method> methods;
  for (const auto& m : split_list(methods_text)) methods.push_back(gha::parse_method(m));

  gha::BenchOptions options = gha::default_bench_options();
  options.gradha.mu = flags.mu;
  options.gradha.tau = flags.tau;
  options.gradha.max_iters = flags.max_iters;
  options.gradha.batch_fraction = flags.batch_fraction;
  options.gpa.max_iters = flags.gpa_iters;
  options.gpa.tol = flags.gpa_tol;

  const auto rows = gha::run_bench(sizes, methods, repeats, seed, options);
  json doc = gha::report::to_json(rows, repeats, seed);
  doc["gradha_params"] = gha::report::to_json(options.gradha);
  doc["gpa_params"] = {{"max_iters", options.gpa.max_iters}, {"tol", options.gpa.tol}};
  write_json(report_path, doc);
  for (const auto& r : rows) {
    std::cout << gha::to_string(r.method) << " " << r.size.label() << ": median "
              << r.median_seconds << " s, ratio " << r.seconds_ratio_to_gradha << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient hyperalignment toolkit"};
  app.require_subcommand(1);

  gha::SynthSpec spec;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ground-truth dataset");
  synth->add_option("--out", out_dir, "Output dataset directory")->required();
  synth->add_option("--subjects", spec.subjects)->capture_default_str();
  synth->add_option("--timepoints", spec.timepoints)->capture_default_str();
  synth->add_option("--voxels", spec.voxels)->capture_default_str();
  synth->add_option("--latent", spec.latent_dim)->capture_default_str();
  synth->add_option("--classes", spec.num_classes)->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();

  std::string data_dir;
  std::uint64_t seed = 0;
  AlignFlags flags;
  std::string model_dir;
  auto* align = app.add_subcommand("align", "Fit an alignment and write mappings + template");
  align->add_option("--data", data_dir, "Dataset directory")->required();
  add_align_flags(align, flags);
  align->add_option("--seed", seed)->capture_default_str();
  align->add_option("--out", model_dir, "Model output directory")->required();

  gha::SvmParams svm;
  std::string report_path;
  auto* eval = app.add_subcommand("eval", "Leave-one-subject-out classification");
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  add_align_flags(eval, flags);
  eval->add_option("--svm-lambda", svm.lambda)->capture_default_str();
  eval->add_option("--svm-epochs", svm.epochs)->capture_default_str();
  eval->add_option("--seed", seed)->capture_default_str();
  eval->add_option("--report", report_path, "JSON report path")->required();

  std::string axis;
  std::string grid;
  std::string csv_path;
  auto* sweep = app.add_subcommand("sweep", "Classification accuracy along one parameter axis");
  sweep->add_option("--data", data_dir, "Dataset directory")->required();
  sweep->add_option("--axis", axis, "features|batch|iters")
      ->required()
      ->check(CLI::IsMember({"features", "batch", "iters"}));
  sweep->add_option("--grid", grid, "Comma-separated grid values")->required();
  add_align_flags(sweep, flags);
  sweep->add_option("--svm-lambda", svm.lambda)->capture_default_str();
  sweep->add_option("--svm-epochs", svm.epochs)->capture_default_str();
  sweep->add_option("--seed", seed)->capture_default_str();
  sweep->add_option("--report", report_path, "JSON report path")->required();
  sweep->add_option("--csv", csv_path, "CSV plot-data path");

  std::string sizes;
  std::string methods = "gradha,gpa";
  std::size_t repeats = 5;
  AlignFlags bench_flags;
  bench_flags.max_iters = 100;
  bench_flags.gpa_tol = -1.0;
  auto* bench = app.add_subcommand("bench", "Median fit runtime per method and size");
  bench->add_option("--sizes", sizes, "Comma-separated SxTxVxF sizes")->required();
  bench->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
  bench->add_option("--repeats", repeats)->capture_default_str();
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("--report", report_path, "JSON report path")->required();
  add_align_flags(bench, bench_flags, false);
  bench->remove_option(bench->get_option("--features"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) return run_synth(spec, out_dir);
    if (*align) return run_align(data_dir, flags, seed, model_dir);
    if (*eval) return run_eval(data_dir, flags, svm, seed, report_path);
    if (*sweep) {
      return run_sweep(data_dir, axis, grid, flags, svm, seed, report_path, csv_path);
    }
    if (*bench) return run_bench(sizes, methods, repeats, seed, bench_flags, report_path);
  } catch (const gha::Error& e) {
    std::cerr << "error (" << gha::to_string(e.kind()) << "): " << e.what() << "\n";
    if (e.kind() == gha::ErrorKind::Spec) return kExitUsage;
    return gha::is_numerical(e.kind()) ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
