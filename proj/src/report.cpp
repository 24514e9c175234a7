#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "projridge/error.hpp"
#include "projridge/harness.hpp"
#include "projridge/kernels.hpp"

namespace projridge {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys{"study", "n",           "p",          "sigma",
                                        "beta",  "design_source", "master_seed", "replications"};
const std::set<std::string> kSourceKeys{"kind", "rho", "base", "band", "block", "path"};

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw input_error(std::string("config field '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw input_error(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw input_error("unknown key '" + k + "' in " + where);
}

json source_to_json(const DesignSource& s) {
  return json{{"kind", to_string(s.kind)}, {"rho", s.rho},     {"base", s.base},
              {"band", s.band},           {"block", s.block}, {"path", s.path}};
}

DesignSource source_from_json(const json& j, DesignSource s) {
  check_keys(j, kSourceKeys, "design_source");
  if (j.contains("kind")) s.kind = parse_design_kind(get_as<std::string>(j, "kind"));
  if (j.contains("rho")) s.rho = get_as<double>(j, "rho");
  if (j.contains("base")) s.base = get_as<double>(j, "base");
  if (j.contains("band")) s.band = get_as<int>(j, "band");
  if (j.contains("block")) s.block = get_as<long>(j, "block");
  if (j.contains("path")) s.path = get_as<std::string>(j, "path");
  return s;
}

std::vector<BetaEntry> beta_from_json(const json& j) {
  if (!j.is_array()) throw input_error("config field 'beta' must be an array of {index, value}");
  std::vector<BetaEntry> out;
  for (const auto& e : j) {
    if (!e.is_object()) throw input_error("beta entries must be objects with 'index' and 'value'");
    check_keys(e, {"index", "value"}, "beta entry");
    out.push_back({get_as<long>(e, "index"), get_as<double>(e, "value")});
  }
  return out;
}

std::string fmt(double x) { return format_double(x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out << text;
  if (!out) throw input_error("write failed for " + path.string());
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

void dump_into(std::string& out, const json& j, int indent, int depth) {
  const std::string pad_in(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string pad_out(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(key).dump() + ": ";
        dump_into(out, value, indent, depth + 1);
      }
      out += "\n" + pad_out + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad_in;
        dump_into(out, j[k], indent, depth + 1);
      }
      out += "\n" + pad_out + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  return out;
}

json config_to_json(const StudyConfig& c) {
  json beta = json::array();
  for (const auto& b : c.beta_spec) beta.push_back({{"index", b.index}, {"value", b.value}});
  return json{{"study", to_string(c.study)},
              {"n", c.n},
              {"p", c.p},
              {"sigma", c.sigma},
              {"beta", beta},
              {"design_source", source_to_json(c.design_source)},
              {"master_seed", c.master_seed},
              {"replications", c.replications}};
}

StudyConfig config_from_json(const json& j, std::optional<StudyId> cli_study) {
  check_keys(j, kConfigKeys, "config");
  std::optional<StudyId> file_study;
  if (j.contains("study")) file_study = parse_study(get_as<std::string>(j, "study"));
  if (file_study && cli_study && *file_study != *cli_study)
    throw input_error("config study '" + to_string(*file_study) + "' conflicts with --study " + to_string(*cli_study));
  const StudyId study = cli_study ? *cli_study : file_study ? *file_study : StudyId::custom;

  StudyConfig c;
  c.study = study;
  if (j.contains("n")) c.n = get_as<long>(j, "n");
  if (j.contains("p")) c.p = get_as<long>(j, "p");

  if (study == StudyId::custom) {
    if (j.contains("sigma")) c.sigma = get_as<double>(j, "sigma");
    if (j.contains("beta")) c.beta_spec = beta_from_json(j.at("beta"));
    if (j.contains("design_source")) c.design_source = source_from_json(j.at("design_source"), c.design_source);
  } else {
    const StudyConfig base = preset(study, c.n, c.p);
    c.sigma = base.sigma;
    c.beta_spec = base.beta_spec;
    c.design_source = base.design_source;
    auto reject = [&](const std::string& field) {
      throw input_error("study " + to_string(study) + " fixes '" + field +
                        "'; use --study custom to change it");
    };
    if (j.contains("sigma") && get_as<double>(j, "sigma") != base.sigma) reject("sigma");
    if (j.contains("beta") && beta_from_json(j.at("beta")) != base.beta_spec) reject("beta");
    if (j.contains("design_source")) {
      DesignSource s = source_from_json(j.at("design_source"), base.design_source);
      if (study == StudyId::III) {
        c.design_source.path = s.path;
        s.path = base.design_source.path;
      }
      if (!(s == base.design_source)) reject("design_source");
    }
  }
  if (j.contains("master_seed")) c.master_seed = get_as<std::uint64_t>(j, "master_seed");
  if (j.contains("replications")) c.replications = get_as<long>(j, "replications");
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path, std::optional<StudyId> cli_study) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, cli_study);
}

json options_to_json(const RunOptions& o) {
  // Worker count and the noise hook are deliberately absent: neither may
  // change what a report contains.
  return json{{"alpha", o.alpha},
              {"lasso_path_points", o.lasso_path_points},
              {"lasso_path_ratio", o.lasso_path_ratio},
              {"enet_lambda2", o.enet_lambda2},
              {"ridge_grid_points", o.ridge_grid_points},
              {"folds", o.folds},
              {"cd_tol", o.cd_tol},
              {"cd_max_iter", o.cd_max_iter}};
}

RunOptions options_from_json(const json& j) {
  check_keys(j,
             {"alpha", "lasso_path_points", "lasso_path_ratio", "enet_lambda2", "ridge_grid_points", "folds", "cd_tol",
              "cd_max_iter"},
             "options");
  RunOptions o;
  if (j.contains("alpha")) o.alpha = get_as<double>(j, "alpha");
  if (j.contains("lasso_path_points")) o.lasso_path_points = get_as<int>(j, "lasso_path_points");
  if (j.contains("lasso_path_ratio")) o.lasso_path_ratio = get_as<double>(j, "lasso_path_ratio");
  if (j.contains("enet_lambda2")) o.enet_lambda2 = get_as<std::vector<double>>(j, "enet_lambda2");
  if (j.contains("ridge_grid_points")) o.ridge_grid_points = get_as<int>(j, "ridge_grid_points");
  if (j.contains("folds")) o.folds = get_as<int>(j, "folds");
  if (j.contains("cd_tol")) o.cd_tol = get_as<double>(j, "cd_tol");
  if (j.contains("cd_max_iter")) o.cd_max_iter = get_as<long>(j, "cd_max_iter");
  return o;
}

std::vector<std::filesystem::path> emit_report(const StudyReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw input_error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  const StudyConfig& c = r.config;

  // table.txt: one row per study, one column per method.
  {
    std::vector<std::string> header{"study", "n", "p"};
    std::vector<std::string> row{to_string(c.study), std::to_string(c.n), std::to_string(c.p)};
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      header.push_back(to_string(r.methods[m]));
      row.push_back(fmt(r.mean_l2[m]));
    }
    std::ostringstream t;
    t << "# mean L2-norm error n^-1 |X beta - X beta_hat|^2 over " << c.replications << " replications\n";
    t << "# design: " << r.design_label << "\n";
    t << "# sigma = " << fmt(c.sigma) << ", seed = " << c.master_seed << ", rank = " << r.rank << "\n";
    for (const auto& w : r.warnings) t << "# warning: " << w << "\n";
    std::vector<std::size_t> width(header.size());
    for (std::size_t k = 0; k < header.size(); ++k) width[k] = std::max(header[k].size(), row[k].size()) + 2;
    auto aligned = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (std::size_t k = 0; k < cells.size(); ++k) line += k + 1 < cells.size() ? pad(cells[k], width[k]) : cells[k];
      return line + "\n";
    };
    t << aligned(header) << aligned(row);
    bool any_fail = false;
    for (long f : r.failures) any_fail = any_fail || f > 0;
    if (any_fail) {
      t << "# failed replications:";
      for (std::size_t m = 0; m < r.methods.size(); ++m) t << " " << to_string(r.methods[m]) << "=" << r.failures[m];
      t << "\n";
    }
    written.push_back(dir / "table.txt");
    write_text(written.back(), t.str());

    std::ostringstream csv;
    for (std::size_t k = 0; k < header.size(); ++k) csv << (k ? "," : "") << header[k];
    csv << "\n";
    for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << row[k];
    csv << "\n";
    written.push_back(dir / "table.csv");
    write_text(written.back(), csv.str());
  }

  {
    std::ostringstream s;
    s << "method,replication,l2_error,selected_count,lower_ok,upper_ok,tuning1,tuning2,status\n";
    for (const auto& per_method : r.results)
      for (const auto& rr : per_method) {
        s << to_string(rr.method) << "," << rr.replication << ",";
        s << (rr.ok ? fmt(rr.l2_error) : "nan") << ",";
        s << (rr.selected_count >= 0 ? std::to_string(rr.selected_count) : "") << ",";
        if (rr.band_check)
          s << (rr.band_check->lower_ok ? "1" : "0") << "," << (rr.band_check->upper_ok ? "1" : "0");
        else
          s << ",";
        s << "," << (rr.ok ? fmt(rr.tuning1) : "") << "," << (rr.ok ? fmt(rr.tuning2) : "") << ",";
        if (rr.ok) {
          s << "ok";
        } else {
          std::string msg = rr.error;
          std::replace(msg.begin(), msg.end(), ',', ';');
          std::replace(msg.begin(), msg.end(), '\n', ' ');
          s << "failed: " << msg;
        }
        s << "\n";
      }
    written.push_back(dir / "replications.csv");
    write_text(written.back(), s.str());
  }

  {
    std::ostringstream s;
    s << "k\tcumulative_proportion\n";
    for (std::size_t k = 0; k < r.cumulative.size(); ++k) s << (k + 1) << "\t" << fmt(r.cumulative[k]) << "\n";
    written.push_back(dir / "cumulative_proportion.tsv");
    write_text(written.back(), s.str());
  }

  {
    json methods = json::array();
    for (Method m : r.methods) methods.push_back(to_string(m));
    json summary = json::object();
    for (std::size_t m = 0; m < r.methods.size(); ++m)
      summary[to_string(r.methods[m])] = {{"mean_l2", std::isfinite(r.mean_l2[m]) ? json(r.mean_l2[m]) : json(nullptr)},
                                          {"failures", r.failures[m]}};
    json man{{"version", kVersion},
             {"config", config_to_json(c)},
             {"methods", methods},
             {"options", options_to_json(r.options)},
             {"kernel_isa", std::string(kernels::isa_name(kernels::active_isa()))},
             {"design_label", r.design_label},
             {"rank", r.rank},
             {"warnings", r.warnings},
             {"summary", summary}};
    written.push_back(dir / "manifest.json");
    write_text(written.back(), dump_json(man) + "\n");
  }
  return written;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("config") || !j.contains("methods"))
    throw input_error("manifest needs 'config' and 'methods'");
  Manifest m;
  m.config = config_from_json(j.at("config"));
  if (!j.at("methods").is_array()) throw input_error("manifest 'methods' must be an array");
  for (const auto& e : j.at("methods")) {
    if (!e.is_string()) throw input_error("manifest methods must be strings");
    m.methods.push_back(parse_method(e.get<std::string>()));
  }
  if (j.contains("options")) m.options = options_from_json(j.at("options"));
  if (j.contains("kernel_isa") && j.at("kernel_isa").is_string()) m.kernel_isa = j.at("kernel_isa").get<std::string>();
  return m;
}

json rate_report_to_json(const RateCheckReport& r) {
  json j{{"theorem", to_string(r.theorem)},
         {"scenario", r.scenario},
         {"n", r.n_values},
         {"a", r.a_values},
         {"h", r.h_values},
         {"ridge_error", r.ridge_error},
         {"ridge_slope", r.ridge_slope},
         {"predicted_ridge_slope", r.predicted_ridge_slope}};
  if (r.theorem == Theorem::t3) {
    j["replications"] = r.replications;
    j["thresholded_error"] = r.thresholded_error;
    j["thresholded_se"] = r.thresholded_se;
    j["thresholded_slope"] = r.thresholded_slope;
    j["thresholded_slope_se"] = r.thresholded_slope_se;
    j["predicted_thresholded_slope"] = r.predicted_thresholded_slope;
  }
  return j;
}

}  // namespace projridge
