#include "fica/serialize.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fica/errors.hpp"

namespace fica {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON cannot carry NaN; nlohmann serializes it as null, so reads go through
// this.
double as_double(const json& j, const std::string& field) {
  if (j.is_null()) return kNaN;
  if (!j.is_number()) throw ValidationError("field '" + field + "' must be a number");
  return j.get<double>();
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix mat_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ValidationError("field '" + field + "' must be a non-empty 2D array");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ValidationError("field '" + field + "' must be rectangular");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = as_double(j[i][c], field);
  }
  return m;
}

Vector vec_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("field '" + field + "' must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = as_double(j[i], field);
  return v;
}

std::string algorithm_name(Algorithm a) { return a == Algorithm::dfl ? "dfl" : "sym"; }

Algorithm algorithm_from_name(const std::string& s) {
  if (s == "dfl") return Algorithm::dfl;
  if (s == "sym") return Algorithm::sym;
  throw ValidationError("field 'algorithm' must be 'dfl' or 'sym'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::gaussian_mixture: return "gaussian_mixture";
    case Family::uniform: return "uniform";
    case Family::laplace: return "laplace";
  }
  throw ValidationError("unknown source family");
}

json source_to_json(const SourceDistribution& s) {
  json j;
  j["family"] = family_name(s.family);
  switch (s.family) {
    case Family::gaussian_mixture:
      j["weights"] = s.weights;
      j["means"] = s.means;
      j["stddevs"] = s.stddevs;
      break;
    case Family::uniform:
      j["half_width"] = s.half_width;
      break;
    case Family::laplace:
      j["scale"] = s.scale;
      break;
  }
  // Emitted parameters are the standardized ones; the marker tells the parser
  // to take them verbatim instead of standardizing again, which keeps the
  // round trip bit-exact.
  j["standardized"] = true;
  j["shift"] = s.shift;
  j["scale_factor"] = s.scale_factor;
  return j;
}

SourceDistribution source_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("each source must be an object");
  if (!j.contains("family")) throw ValidationError("source is missing field 'family'");
  const std::string fam = j.at("family").get<std::string>();
  const bool standardized = j.value("standardized", false);

  auto get_vec = [&](const char* key) {
    if (!j.contains(key))
      throw ValidationError(std::string("gaussian_mixture source is missing field '") + key + "'");
    return j.at(key).get<std::vector<double>>();
  };

  if (fam == "gaussian_mixture") {
    auto weights = get_vec("weights");
    auto means = get_vec("means");
    auto stddevs = get_vec("stddevs");
    if (!standardized) return gaussian_mixture(std::move(weights), std::move(means), std::move(stddevs));
    SourceDistribution s;
    s.family = Family::gaussian_mixture;
    s.weights = std::move(weights);
    s.means = std::move(means);
    s.stddevs = std::move(stddevs);
    if (s.weights.empty() || s.weights.size() != s.means.size() ||
        s.weights.size() != s.stddevs.size())
      throw ValidationError("gaussian_mixture source has inconsistent parameter lengths");
    s.shift = j.value("shift", 0.0);
    s.scale_factor = j.value("scale_factor", 1.0);
    return s;
  }
  if (fam == "uniform") {
    if (!j.contains("half_width"))
      throw ValidationError("uniform source is missing field 'half_width'");
    const double hw = as_double(j.at("half_width"), "half_width");
    if (!standardized) return uniform(hw);
    SourceDistribution s;
    s.family = Family::uniform;
    s.half_width = hw;
    s.shift = j.value("shift", 0.0);
    s.scale_factor = j.value("scale_factor", 1.0);
    return s;
  }
  if (fam == "laplace") {
    if (!j.contains("scale")) throw ValidationError("laplace source is missing field 'scale'");
    const double sc = as_double(j.at("scale"), "scale");
    if (!standardized) return laplace(sc);
    SourceDistribution s;
    s.family = Family::laplace;
    s.scale = sc;
    s.shift = j.value("shift", 0.0);
    s.scale_factor = j.value("scale_factor", 1.0);
    return s;
  }
  throw ValidationError("field 'family' must be gaussian_mixture, uniform, or laplace");
}

json table_to_json(const VarianceTable& t) {
  json j;
  j["algorithm"] = algorithm_name(t.algorithm);
  j["scenario"] = scenario_id(t.scenario);
  j["extraction_order"] = t.extraction_order;
  j["v"] = mat_to_json(t.v);
  j["v_printed"] = mat_to_json(t.v_printed);
  j["tau"] = t.tau;
  return j;
}

VarianceTable table_from_json(const json& j) {
  VarianceTable t;
  t.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
  t.scenario = scenario_from_int(j.at("scenario").get<int>());
  t.extraction_order = j.at("extraction_order").get<std::vector<int>>();
  t.v = mat_from_json(j.at("v"), "v");
  t.v_printed = mat_from_json(j.at("v_printed"), "v_printed");
  t.tau = j.at("tau").get<std::vector<double>>();
  return t;
}

json moments_to_json(const MomentSet& m) {
  json j;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["gamma"] = m.gamma;
  j["eta"] = m.eta;
  j["tau"] = m.tau;
  j["skew"] = m.skew;
  j["separable"] = m.separable;
  return j;
}

MomentSet moments_from_json(const json& j) {
  MomentSet m;
  m.alpha = as_double(j.at("alpha"), "alpha");
  m.beta = as_double(j.at("beta"), "beta");
  m.gamma = as_double(j.at("gamma"), "gamma");
  m.eta = as_double(j.at("eta"), "eta");
  m.tau = as_double(j.at("tau"), "tau");
  m.skew = as_double(j.at("skew"), "skew");
  m.separable = j.at("separable").get<bool>();
  return m;
}

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(std::string(what) + ": malformed JSON");
  return j;
}

}  // namespace

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  j["version"] = std::string(kToolVersion);
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["scenario"] = scenario_id(cfg.scenario);
  j["nonlinearity"] = cfg.nonlinearity;
  j["n"] = cfg.n;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  j["kernel"] = cfg.kernel;
  j["init"] = cfg.init;
  j["tol"] = cfg.policy.tol;
  j["max_sweeps"] = cfg.policy.max_sweeps;
  j["max_exclusion_rate"] = cfg.max_exclusion_rate;
  j["tie_tol"] = cfg.tie_tol;
  j["hist_bins"] = cfg.hist_bins;
  j["quad_nodes"] = cfg.moment_options.quad_nodes;
  j["alpha_tol"] = cfg.moment_options.alpha_tol;
  j["mixing"] = mat_to_json(cfg.model.h);
  json sources = json::array();
  for (const auto& s : cfg.model.sources) sources.push_back(source_to_json(s));
  j["sources"] = std::move(sources);
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json_text(const std::string& text) {
  const json j = parse_or_throw(text, "config");
  if (!j.is_object()) throw ValidationError("config: top level must be an object");

  static const std::set<std::string> allowed = {
      "version", "algorithm", "scenario", "nonlinearity", "n", "trials", "seed",
      "threads", "kernel", "init", "tol", "max_sweeps", "max_exclusion_rate", "tie_tol",
      "hist_bins", "quad_nodes", "alpha_tol", "mixing", "sources", "progress"};
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ValidationError("config: unknown field '" + item.key() + "'");

  ExperimentConfig cfg;
  try {
    if (!j.contains("mixing")) throw ValidationError("config: missing field 'mixing'");
    if (!j.contains("sources")) throw ValidationError("config: missing field 'sources'");
    cfg.model.h = mat_from_json(j.at("mixing"), "mixing");
    if (cfg.model.h.rows() != cfg.model.h.cols())
      throw ValidationError("config: 'mixing' must be square");
    for (const auto& s : j.at("sources")) cfg.model.sources.push_back(source_from_json(s));
    if (static_cast<Eigen::Index>(cfg.model.sources.size()) != cfg.model.h.rows())
      throw ValidationError("config: 'sources' length must match the mixing dimension");

    if (j.contains("algorithm"))
      cfg.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    if (j.contains("scenario")) cfg.scenario = scenario_from_int(j.at("scenario").get<int>());
    if (j.contains("nonlinearity")) cfg.nonlinearity = j.at("nonlinearity").get<std::string>();
    if (j.contains("n")) cfg.n = j.at("n").get<std::int64_t>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("seed")) cfg.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("kernel")) cfg.kernel = j.at("kernel").get<std::string>();
    if (j.contains("init")) cfg.init = j.at("init").get<std::string>();
    if (j.contains("tol")) cfg.policy.tol = as_double(j.at("tol"), "tol");
    if (j.contains("max_sweeps")) cfg.policy.max_sweeps = j.at("max_sweeps").get<int>();
    if (j.contains("max_exclusion_rate"))
      cfg.max_exclusion_rate = as_double(j.at("max_exclusion_rate"), "max_exclusion_rate");
    if (j.contains("tie_tol")) cfg.tie_tol = as_double(j.at("tie_tol"), "tie_tol");
    if (j.contains("hist_bins")) cfg.hist_bins = j.at("hist_bins").get<int>();
    if (j.contains("quad_nodes")) cfg.moment_options.quad_nodes = j.at("quad_nodes").get<int>();
    if (j.contains("alpha_tol"))
      cfg.moment_options.alpha_tol = as_double(j.at("alpha_tol"), "alpha_tol");
    if (j.contains("progress")) cfg.progress = j.at("progress").get<bool>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig preset_config(std::string_view name) {
  ExperimentConfig cfg;
  if (name == "paper-example") {
    cfg.n = 5000;
    cfg.trials = 5000;
  } else if (name == "desk") {
    cfg.n = 2000;
    cfg.trials = 1000;
  } else {
    throw ValidationError("unknown preset (expected 'paper-example' or 'desk')");
  }
  const int d = 3;
  cfg.model.h = seeded_orthogonal(d, 42);
  for (int i = 0; i < d; ++i) cfg.model.sources.push_back(default_bimodal());
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // Re-parse into the key-sorted container so the hash is invariant to the
  // key order of whatever document the config came from. The thread count is
  // an execution detail that never changes results, so it stays out of the
  // identity: serial and parallel runs of one experiment share a hash.
  nlohmann::json canonical = nlohmann::json::parse(config_to_json_text(cfg));
  canonical.erase("threads");
  const std::string dump = canonical.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_to_json_text(const TrialReport& r, const std::string& cfg_hash) {
  json j;
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = cfg_hash;
  j["d"] = r.d;
  j["n"] = r.n;
  j["trials"] = r.trials;
  j["included"] = r.included;
  j["excluded_nonconverged"] = r.excluded_nonconverged;
  j["excluded_ambiguous"] = r.excluded_ambiguous;
  j["exclusion_rate"] = r.exclusion_rate;
  j["algorithm"] = algorithm_name(r.algorithm);
  j["scenario"] = scenario_id(r.scenario);
  j["nonlinearity"] = r.nonlinearity;
  j["seed"] = r.master_seed;
  j["dominant_order"] = r.dominant_order;
  j["tau"] = r.tau;

  json entries = json::array();
  for (const auto& e : r.entries) {
    json je;
    je["i"] = e.i;
    je["j"] = e.j;
    je["var_emp"] = e.var_emp;
    je["v_pred"] = e.v_pred;
    je["v_pred_printed"] = e.v_pred_printed;
    je["rel_err"] = e.rel_err;
    je["z_var"] = e.z_var;
    je["ks"] = e.ks;
    json jh;
    jh["edges"] = e.hist.edges;
    jh["counts"] = e.hist.counts;
    jh["overlay_x"] = e.hist.overlay_x;
    jh["overlay_pdf"] = e.hist.overlay_pdf;
    je["hist"] = std::move(jh);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);

  json bins = json::array();
  for (const auto& b : r.bins) {
    json jb;
    jb["order"] = b.order;
    jb["count"] = b.count;
    jb["var_emp"] = mat_to_json(b.var_emp);
    bins.push_back(std::move(jb));
  }
  j["bins"] = std::move(bins);

  json cov_emp = json::array(), cov_pred = json::array();
  for (const auto& m : r.demix_cov_emp) cov_emp.push_back(mat_to_json(m));
  for (const auto& m : r.demix_cov_pred) cov_pred.push_back(mat_to_json(m));
  j["demix_cov_emp"] = std::move(cov_emp);
  j["demix_cov_pred"] = std::move(cov_pred);

  json adj = json::array();
  for (const auto& a : r.adjudication) {
    json ja;
    ja["i"] = a.i;
    ja["j"] = a.j;
    ja["var_emp"] = a.var_emp;
    ja["se"] = a.se;
    ja["v_consistent"] = a.v_consistent;
    ja["v_printed"] = a.v_printed;
    ja["z_consistent"] = a.z_consistent;
    ja["z_printed"] = a.z_printed;
    ja["winner"] = a.winner;
    adj.push_back(std::move(ja));
  }
  j["adjudication"] = std::move(adj);
  j["adjudication_winner"] = r.adjudication_winner;
  return j.dump(2) + "\n";
}

TrialReport report_from_json_text(const std::string& text) {
  const json j = parse_or_throw(text, "report");
  TrialReport r;
  try {
    r.d = j.at("d").get<int>();
    r.n = j.at("n").get<std::int64_t>();
    r.trials = j.at("trials").get<int>();
    r.included = j.at("included").get<int>();
    r.excluded_nonconverged = j.at("excluded_nonconverged").get<int>();
    r.excluded_ambiguous = j.at("excluded_ambiguous").get<int>();
    r.exclusion_rate = as_double(j.at("exclusion_rate"), "exclusion_rate");
    r.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    r.scenario = scenario_from_int(j.at("scenario").get<int>());
    r.nonlinearity = j.at("nonlinearity").get<std::string>();
    r.master_seed = j.at("seed").get<std::uint64_t>();
    r.dominant_order = j.at("dominant_order").get<std::vector<int>>();
    r.tau = j.at("tau").get<std::vector<double>>();

    for (const auto& je : j.at("entries")) {
      EntryReport e;
      e.i = je.at("i").get<int>();
      e.j = je.at("j").get<int>();
      e.var_emp = as_double(je.at("var_emp"), "var_emp");
      e.v_pred = as_double(je.at("v_pred"), "v_pred");
      e.v_pred_printed = as_double(je.at("v_pred_printed"), "v_pred_printed");
      e.rel_err = as_double(je.at("rel_err"), "rel_err");
      e.z_var = as_double(je.at("z_var"), "z_var");
      e.ks = as_double(je.at("ks"), "ks");
      const auto& jh = je.at("hist");
      e.hist.edges = jh.at("edges").get<std::vector<double>>();
      e.hist.counts = jh.at("counts").get<std::vector<std::int64_t>>();
      e.hist.overlay_x = jh.at("overlay_x").get<std::vector<double>>();
      e.hist.overlay_pdf = jh.at("overlay_pdf").get<std::vector<double>>();
      r.entries.push_back(std::move(e));
    }

    for (const auto& jb : j.at("bins")) {
      OrderBin b;
      b.order = jb.at("order").get<std::vector<int>>();
      b.count = jb.at("count").get<int>();
      b.var_emp = mat_from_json(jb.at("var_emp"), "var_emp");
      r.bins.push_back(std::move(b));
    }

    for (const auto& jm : j.at("demix_cov_emp")) r.demix_cov_emp.push_back(mat_from_json(jm, "demix_cov_emp"));
    for (const auto& jm : j.at("demix_cov_pred")) r.demix_cov_pred.push_back(mat_from_json(jm, "demix_cov_pred"));

    for (const auto& ja : j.at("adjudication")) {
      AdjudicationEntry a;
      a.i = ja.at("i").get<int>();
      a.j = ja.at("j").get<int>();
      a.var_emp = as_double(ja.at("var_emp"), "var_emp");
      a.se = as_double(ja.at("se"), "se");
      a.v_consistent = as_double(ja.at("v_consistent"), "v_consistent");
      a.v_printed = as_double(ja.at("v_printed"), "v_printed");
      a.z_consistent = as_double(ja.at("z_consistent"), "z_consistent");
      a.z_printed = as_double(ja.at("z_printed"), "z_printed");
      a.winner = ja.at("winner").get<std::string>();
      r.adjudication.push_back(std::move(a));
    }
    r.adjudication_winner = j.at("adjudication_winner").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return r;
}

std::string theory_to_json_text(const TheoryBundle& bundle, const std::string& cfg_hash) {
  json j;
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = cfg_hash;
  j["d"] = bundle.d;
  j["nonlinearity"] = bundle.nonlinearity;
  json moments = json::array();
  for (const auto& m : bundle.moments) moments.push_back(moments_to_json(m));
  j["moments"] = std::move(moments);
  json tables = json::array();
  for (const auto& t : bundle.tables) tables.push_back(table_to_json(t));
  j["tables"] = std::move(tables);
  return j.dump(2) + "\n";
}

TheoryBundle theory_from_json_text(const std::string& text) {
  const json j = parse_or_throw(text, "theory");
  TheoryBundle b;
  try {
    b.d = j.at("d").get<int>();
    b.nonlinearity = j.at("nonlinearity").get<std::string>();
    for (const auto& jm : j.at("moments")) b.moments.push_back(moments_from_json(jm));
    for (const auto& jt : j.at("tables")) b.tables.push_back(table_from_json(jt));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("theory: ") + e.what());
  }
  return b;
}

std::string verdict_to_json_text(const Verdict& v) {
  json j;
  j["version"] = std::string(kToolVersion);
  j["tolerance"] = v.tolerance;
  j["pass"] = v.pass;
  json entries = json::array();
  for (const auto& e : v.entries) {
    json je;
    je["order"] = e.order;
    je["i"] = e.i;
    je["j"] = e.j;
    je["var_emp"] = e.var_emp;
    je["v_pred"] = e.v_pred;
    je["rel_err"] = e.rel_err;
    je["gated"] = e.gated;
    je["pass"] = e.pass;
    je["rule"] = e.rule;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

std::string moments_to_json_text(const std::vector<MomentRow>& rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    json j;
    j["source"] = row.source;
    j["nonlinearity"] = row.nonlinearity;
    j["moments"] = moments_to_json(row.moments);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string moments_to_csv(const std::vector<MomentRow>& rows) {
  std::string out = "source,nonlinearity,alpha,beta,gamma,eta,tau,skew,separable\n";
  for (const auto& row : rows) {
    const auto& m = row.moments;
    out += std::to_string(row.source) + "," + row.nonlinearity + "," + fmt17(m.alpha) + "," +
           fmt17(m.beta) + "," + fmt17(m.gamma) + "," + fmt17(m.eta) + "," + fmt17(m.tau) +
           "," + fmt17(m.skew) + "," + (m.separable ? "1" : "0") + "\n";
  }
  return out;
}

std::string tables_to_json_text(const std::vector<VarianceTable>& tables,
                                const std::vector<MomentSet>& moments) {
  json j;
  j["version"] = std::string(kToolVersion);
  json jm = json::array();
  for (const auto& m : moments) jm.push_back(moments_to_json(m));
  j["moments"] = std::move(jm);
  json jt = json::array();
  for (const auto& t : tables) jt.push_back(table_to_json(t));
  j["tables"] = std::move(jt);
  return j.dump(2) + "\n";
}

std::string tables_to_csv(const std::vector<VarianceTable>& tables) {
  std::string out = "algorithm,scenario,order,i,j,v,v_printed\n";
  for (const auto& t : tables) {
    std::string order;
    for (std::size_t p = 0; p < t.extraction_order.size(); ++p) {
      if (p) order += ' ';
      order += std::to_string(t.extraction_order[p]);
    }
    for (Eigen::Index i = 0; i < t.v.rows(); ++i)
      for (Eigen::Index jj = 0; jj < t.v.cols(); ++jj)
        out += algorithm_name(t.algorithm) + "," + std::to_string(scenario_id(t.scenario)) +
               "," + order + "," + std::to_string(i) + "," + std::to_string(jj) + "," +
               fmt17(t.v(i, jj)) + "," + fmt17(t.v_printed(i, jj)) + "\n";
  }
  return out;
}

std::string observations_to_csv(const DataMatrix& y) {
  const auto d = y.rows();
  std::string out;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (k) out += ',';
    out += "y" + std::to_string(k + 1);
  }
  out += '\n';
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    for (Eigen::Index k = 0; k < d; ++k) {
      if (k) out += ',';
      out += fmt17(y(k, t));
    }
    out += '\n';
  }
  return out;
}

DataMatrix observations_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("observations: empty file");
  // Header row y1..yd fixes the channel count.
  std::size_t d = 1;
  for (char c : line)
    if (c == ',') ++d;

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t cols = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      try {
        values.push_back(std::stod(line.substr(pos, comma - pos)));
      } catch (const std::exception&) {
        throw ValidationError("observations: line " + std::to_string(rows + 2) +
                              " holds a non-numeric field");
      }
      ++cols;
      pos = comma + 1;
    }
    if (cols != d)
      throw ValidationError("observations: line " + std::to_string(rows + 2) +
                            " has " + std::to_string(cols) + " fields, expected " +
                            std::to_string(d));
    ++rows;
  }
  if (rows == 0) throw ValidationError("observations: no samples");
  DataMatrix y(d, rows);
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t k = 0; k < d; ++k) y(k, t) = values[t * d + k];
  return y;
}

std::string matrix_to_csv(const Matrix& m, const std::string& col_prefix) {
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (j) out += ',';
    out += col_prefix + std::to_string(j + 1);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += fmt17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string histograms_to_csv(const TrialReport& report) {
  std::string out = "entry_i,entry_j,bin_lo,bin_hi,count,density,overlay_pdf\n";
  for (const auto& e : report.entries) {
    const auto& h = e.hist;
    std::int64_t included = 0;
    for (auto c : h.counts) included += c;
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
      const double width = h.edges[b + 1] - h.edges[b];
      const double density =
          included > 0 && width > 0.0
              ? static_cast<double>(h.counts[b]) / (static_cast<double>(included) * width)
              : 0.0;
      out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + fmt17(h.edges[b]) + "," +
             fmt17(h.edges[b + 1]) + "," + std::to_string(h.counts[b]) + "," + fmt17(density);
      out += ',';
      // Overlay sampled at the bin center: the overlay grid holds 4 points
      // per bin, so the center of bin b is grid point 4b + 2.
      if (!h.overlay_pdf.empty()) out += fmt17(h.overlay_pdf[4 * b + 2]);
      out += '\n';
    }
  }
  return out;
}

std::string gnuplot_script(const TrialReport& report, const std::string& hist_csv_name) {
  std::string s;
  s += "set datafile separator \",\"\n";
  s += "set datafile missing \"\"\n";
  s += "set terminal svg size 1400,1400\n";
  s += "set output 'histograms.svg'\n";
  s += "set style fill solid 0.35\n";
  s += "set multiplot layout " + std::to_string(report.d) + "," + std::to_string(report.d) +
       "\n";
  for (const auto& e : report.entries) {
    const std::string i = std::to_string(e.i), j = std::to_string(e.j);
    s += "set title 'entry (" + i + "," + j + ")'\n";
    s += "plot '" + hist_csv_name + "' skip 1 using (($1==" + i + " && $2==" + j +
         ") ? ($3+$4)/2 : 1/0):6:($4-$3) with boxes notitle, \\\n";
    s += "     '' skip 1 using (($1==" + i + " && $2==" + j +
         ") ? ($3+$4)/2 : 1/0):7 with lines lw 2 notitle\n";
  }
  s += "unset multiplot\n";
  return s;
}

Truth truth_from_json_text(const std::string& text) {
  const json j = parse_or_throw(text, "truth");
  Truth t;
  try {
    t.mean = vec_from_json(j.at("mean"), "mean");
    t.cov = mat_from_json(j.at("cov"), "cov");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("truth: ") + e.what());
  }
  if (t.cov.rows() != t.cov.cols() || t.cov.rows() != t.mean.size())
    throw ValidationError("truth: mean and cov dimensions disagree");
  return t;
}

std::string manifest_to_json_text(const std::string& cfg_hash,
                                  const std::vector<std::string>& outputs,
                                  const std::string& timestamp_or_empty) {
  json j;
  j["version"] = std::string(kToolVersion);
  j["config_hash"] = cfg_hash;
  j["outputs"] = outputs;
  if (!timestamp_or_empty.empty()) j["timestamp"] = timestamp_or_empty;
  return j.dump(2) + "\n";
}

}  // namespace fica
