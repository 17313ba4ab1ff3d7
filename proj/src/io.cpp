#include "bcfuse/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bcfuse/csv.hpp"

namespace bcfuse {

using nlohmann::json;

std::vector<double> StandardizeTransform::apply(const std::vector<double>& raw) const {
  if (!applied) return raw;
  if (raw.size() != mean.size())
    throw std::runtime_error("standardize transform: covariate length mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - mean[j]) / sd[j];
  return out;
}

namespace {

// locate columns named <prefix>1..<prefix>k; they must be contiguous numbering
std::vector<int> numbered_cols(const CsvTable& t, const std::string& prefix, const std::string& path) {
  std::vector<int> cols;
  for (int j = 1;; ++j) {
    const int c = t.col(prefix + std::to_string(j));
    if (c < 0) break;
    cols.push_back(c);
  }
  for (const auto& h : t.header) {
    if (h.size() > prefix.size() && h.compare(0, prefix.size(), prefix) == 0 &&
        h.find_first_not_of("0123456789", prefix.size()) == std::string::npos) {
      const long idx = parse_long(h.substr(prefix.size()), path);
      if (idx < 1 || idx > static_cast<long>(cols.size()))
        throw std::runtime_error(path + ": column " + h + " breaks the contiguous " + prefix +
                                 "1.." + std::to_string(cols.size()) + " numbering");
    }
  }
  return cols;
}

} // namespace

IngestResult ingest(const DataPaths& paths, const IngestOptions& opt) {
  if (opt.L < 2) throw std::runtime_error("ingest: L must be at least 2");
  if (!(opt.zeta > 0.0)) throw std::runtime_error("ingest: zeta must be positive");
  if (opt.max_images < 1) throw std::runtime_error("ingest: max_images must be >= 1");

  IngestResult res;
  Dataset& data = res.data;
  data.L = opt.L;

  const CsvTable seq_t = read_csv(paths.sequences);
  const int c_sid = seq_t.require_col("sequence_id", paths.sequences);
  const auto x_cols = numbered_cols(seq_t, "x", paths.sequences);
  data.p = static_cast<int>(x_cols.size());
  const int c_truey = seq_t.col("true_y");
  std::map<std::string, int> seq_index;
  for (std::size_t r = 0; r < seq_t.rows.size(); ++r) {
    const auto& row = seq_t.rows[r];
    const std::string ctx = paths.sequences + " row " + std::to_string(r + 2);
    Sequence s;
    s.id = row[c_sid];
    if (s.id.empty()) throw std::runtime_error(ctx + ": empty sequence_id");
    if (seq_index.count(s.id)) throw std::runtime_error(ctx + ": duplicate sequence_id " + s.id);
    s.x.resize(data.p);
    for (int j = 0; j < data.p; ++j) s.x[j] = parse_double(row[x_cols[j]], ctx);
    if (c_truey >= 0 && !row[c_truey].empty()) {
      const long ty = parse_long(row[c_truey], ctx);
      if (ty < 1 || ty > opt.L) throw std::runtime_error(ctx + ": true_y outside 1.." + std::to_string(opt.L));
      s.true_y = static_cast<int>(ty);
    }
    seq_index[s.id] = static_cast<int>(data.sequences.size());
    data.sequences.push_back(std::move(s));
  }

  const CsvTable img_t = read_csv(paths.images);
  const int ic_sid = img_t.require_col("sequence_id", paths.images);
  const int ic_iid = img_t.require_col("image_id", paths.images);
  const auto u_cols = numbered_cols(img_t, "u", paths.images);
  data.q = static_cast<int>(u_cols.size());
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> img_index;
  for (std::size_t r = 0; r < img_t.rows.size(); ++r) {
    const auto& row = img_t.rows[r];
    const std::string ctx = paths.images + " row " + std::to_string(r + 2);
    const auto it = seq_index.find(row[ic_sid]);
    if (it == seq_index.end())
      throw std::runtime_error(ctx + ": unknown sequence reference " + row[ic_sid]);
    Image im;
    im.id = row[ic_iid];
    const auto key = std::make_pair(row[ic_sid], im.id);
    if (img_index.count(key)) throw std::runtime_error(ctx + ": duplicate image " + im.id);
    im.u.resize(data.q);
    for (int j = 0; j < data.q; ++j) im.u[j] = parse_double(row[u_cols[j]], ctx);
    auto& seq = data.sequences[it->second];
    img_index[key] = {it->second, static_cast<int>(seq.images.size())};
    seq.images.push_back(std::move(im));
  }

  auto locate_image = [&](const std::string& sid, const std::string& iid,
                          const std::string& ctx) -> Image& {
    const auto it = img_index.find(std::make_pair(sid, iid));
    if (it == img_index.end())
      throw std::runtime_error(ctx + ": unknown sequence/image reference " + sid + "/" + iid);
    return data.sequences[it->second.first].images[it->second.second];
  };

  if (!paths.annotations.empty() && std::filesystem::exists(paths.annotations)) {
    const CsvTable ann_t = read_csv(paths.annotations);
    const int ac_sid = ann_t.require_col("sequence_id", paths.annotations);
    const int ac_iid = ann_t.require_col("image_id", paths.annotations);
    const int ac_ann = ann_t.require_col("annotator_id", paths.annotations);
    const int ac_sc = ann_t.require_col("score", paths.annotations);
    std::set<std::tuple<std::string, std::string, long>> seen;
    for (std::size_t r = 0; r < ann_t.rows.size(); ++r) {
      const auto& row = ann_t.rows[r];
      const std::string ctx = paths.annotations + " row " + std::to_string(r + 2);
      const long a = parse_long(row[ac_ann], ctx);
      const long z = parse_long(row[ac_sc], ctx);
      if (z < 1 || z > opt.L)
        throw std::runtime_error(ctx + ": score " + std::to_string(z) + " outside 1.." + std::to_string(opt.L));
      if (a < 1) throw std::runtime_error(ctx + ": annotator_id must be >= 1");
      if (!seen.insert({row[ac_sid], row[ac_iid], a}).second)
        throw std::runtime_error(ctx + ": duplicate (sequence, image, annotator) annotation row");
      Image& im = locate_image(row[ac_sid], row[ac_iid], ctx);
      if (im.annotation)
        throw std::runtime_error(ctx + ": image " + row[ac_iid] + " already carries an annotation");
      im.annotation = Annotation{static_cast<int>(z), static_cast<int>(a)};
      data.A = std::max(data.A, static_cast<int>(a));
    }
  }

  if (!paths.confidences.empty() && std::filesystem::exists(paths.confidences)) {
    const CsvTable conf_t = read_csv(paths.confidences);
    const int cc_sid = conf_t.require_col("sequence_id", paths.confidences);
    const int cc_iid = conf_t.require_col("image_id", paths.confidences);
    const auto c_cols = numbered_cols(conf_t, "c", paths.confidences);
    if (static_cast<int>(c_cols.size()) != opt.L)
      throw std::runtime_error(paths.confidences + ": expected c1..c" + std::to_string(opt.L) +
                               " columns, found " + std::to_string(c_cols.size()));
    for (std::size_t r = 0; r < conf_t.rows.size(); ++r) {
      const auto& row = conf_t.rows[r];
      const std::string ctx = paths.confidences + " row " + std::to_string(r + 2);
      Image& im = locate_image(row[cc_sid], row[cc_iid], ctx);
      if (im.confidence) throw std::runtime_error(ctx + ": duplicate confidence row for image " + row[cc_iid]);
      std::vector<double> c(opt.L);
      double sum = 0.0;
      for (int l = 0; l < opt.L; ++l) {
        c[l] = parse_double(row[c_cols[l]], ctx);
        if (!(c[l] >= 0.0)) throw std::runtime_error(ctx + ": negative confidence entry");
        sum += c[l];
      }
      if (std::fabs(sum - 1.0) > opt.simplex_tol + 1e-12)
        throw std::runtime_error(ctx + ": confidence row sums to " + fmt_double(sum) +
                                 ", outside tolerance " + fmt_double(opt.simplex_tol));
      if (std::fabs(sum - 1.0) > 1e-12)
        for (auto& v : c) v /= sum;
      // iterate the smoothing so re-ingesting exported data is a fixed point
      for (int pass = 0; pass < 5; ++pass) {
        auto adj = zeta_adjust(c, opt.zeta);
        if (adj == c) break;
        c = std::move(adj);
      }
      im.confidence = std::move(c);
    }
  }

  // drop unobserved images is not allowed; fail instead, then cap long sequences
  for (auto& seq : data.sequences) {
    if (seq.images.empty()) continue; // caught by validate below
    if (static_cast<int>(seq.images.size()) > opt.max_images) {
      Rng rng(hash_seed(opt.seed, 0x696d67ULL, std::hash<std::string>{}(seq.id)));
      std::vector<int> idx(seq.images.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
      rng.shuffle(idx);
      idx.resize(opt.max_images);
      std::sort(idx.begin(), idx.end());
      std::vector<Image> kept;
      kept.reserve(opt.max_images);
      for (int k : idx) kept.push_back(std::move(seq.images[k]));
      seq.images = std::move(kept);
    }
  }

  if (opt.standardize && data.p > 0) {
    const int n = data.n_sequences();
    if (n < 2) throw std::runtime_error("ingest: standardization needs at least two sequences");
    res.transform.applied = true;
    res.transform.mean.assign(data.p, 0.0);
    res.transform.sd.assign(data.p, 0.0);
    for (const auto& s : data.sequences)
      for (int j = 0; j < data.p; ++j) res.transform.mean[j] += s.x[j];
    for (int j = 0; j < data.p; ++j) res.transform.mean[j] /= n;
    for (const auto& s : data.sequences)
      for (int j = 0; j < data.p; ++j) {
        const double d = s.x[j] - res.transform.mean[j];
        res.transform.sd[j] += d * d;
      }
    for (int j = 0; j < data.p; ++j) {
      res.transform.sd[j] = std::sqrt(res.transform.sd[j] / (n - 1));
      if (!(res.transform.sd[j] > 0.0))
        throw std::runtime_error("ingest: covariate column x" + std::to_string(j + 1) +
                                 " is constant; cannot standardize");
    }
    for (auto& s : data.sequences) s.x = res.transform.apply(s.x);
  }

  data.validate(1e-9);
  return res;
}

void write_dataset(const Dataset& data, const DataPaths& paths) {
  const bool any_truth =
      std::any_of(data.sequences.begin(), data.sequences.end(), [](const Sequence& s) { return s.true_y.has_value(); });
  std::ostringstream seqs;
  seqs << "sequence_id";
  for (int j = 1; j <= data.p; ++j) seqs << ",x" << j;
  if (any_truth) seqs << ",true_y";
  seqs << "\n";
  for (const auto& s : data.sequences) {
    seqs << s.id;
    for (double v : s.x) seqs << ',' << fmt_double(v);
    if (any_truth) {
      seqs << ',';
      if (s.true_y) seqs << *s.true_y;
    }
    seqs << "\n";
  }
  atomic_write_text(paths.sequences, seqs.str());

  std::ostringstream imgs, anns, confs;
  imgs << "sequence_id,image_id";
  for (int j = 1; j <= data.q; ++j) imgs << ",u" << j;
  imgs << "\n";
  anns << "sequence_id,image_id,annotator_id,score\n";
  confs << "sequence_id,image_id";
  for (int l = 1; l <= data.L; ++l) confs << ",c" << l;
  confs << "\n";
  for (const auto& s : data.sequences) {
    for (const auto& im : s.images) {
      imgs << s.id << ',' << im.id;
      for (double v : im.u) imgs << ',' << fmt_double(v);
      imgs << "\n";
      if (im.annotation)
        anns << s.id << ',' << im.id << ',' << im.annotation->annotator << ',' << im.annotation->score << "\n";
      if (im.confidence) {
        confs << s.id << ',' << im.id;
        for (double v : *im.confidence) confs << ',' << fmt_double(v);
        confs << "\n";
      }
    }
  }
  atomic_write_text(paths.images, imgs.str());
  if (!paths.annotations.empty()) atomic_write_text(paths.annotations, anns.str());
  if (!paths.confidences.empty()) atomic_write_text(paths.confidences, confs.str());
}

// ---------------------------------------------------------------------------
// posterior sample persistence

namespace {

void emit_param(std::ostringstream& out, long iter, const char* name, int index, double v) {
  out << iter << ',' << name << ',' << index << ',' << fmt_double(v) << "\n";
}

} // namespace

void write_samples_csv(const std::string& path, const ChainOutput& chain, const McmcConfig& cfg) {
  std::ostringstream out;
  out << "iteration,parameter,index,value\n";
  const bool fusion = chain.variant == ModelVariant::kFull ||
                      chain.variant == ModelVariant::kOrdinalOnly ||
                      chain.variant == ModelVariant::kCompositionalOnly;
  for (std::size_t s = 0; s < chain.samples.size(); ++s) {
    const long iter = cfg.burnin + static_cast<long>(s + 1) * cfg.thin;
    const ParamState& st = chain.samples[s];
    emit_param(out, iter, "beta0", 1, st.beta0);
    for (std::size_t j = 0; j < st.beta.size(); ++j)
      emit_param(out, iter, "beta", static_cast<int>(j + 1), st.beta[j]);
    if (chain.variant == ModelVariant::kLinear) {
      emit_param(out, iter, "sigma2", 1, st.sigma2);
      continue;
    }
    const auto& traw = st.theta.raw();
    for (std::size_t j = 0; j < traw.size(); ++j)
      emit_param(out, iter, "theta_tilde", static_cast<int>(j + 1), traw[j]);
    if (!fusion) continue; // maximum-observed samples only the regression block
    const int L = st.L();
    for (int y = 1; y <= L; ++y) {
      const auto& praw = st.phi[y - 1].raw();
      for (std::size_t j = 0; j < praw.size(); ++j)
        emit_param(out, iter, "phi_tilde", (y - 1) * (L - 2) + static_cast<int>(j + 1), praw[j]);
    }
    for (int a = 1; a <= st.A(); ++a)
      for (int y = 1; y <= L; ++y) emit_param(out, iter, "nu", (a - 1) * L + y, st.nu[a - 1][y - 1]);
    for (int y = 1; y <= L; ++y) emit_param(out, iter, "nu_tilde", y, st.nu_tilde[y - 1]);
    for (int y = 1; y <= L; ++y)
      for (int l = 1; l <= L; ++l) emit_param(out, iter, "alpha", (y - 1) * L + l, st.alpha[y - 1][l - 1]);
    emit_param(out, iter, "omega0", 1, st.omega0);
    for (std::size_t j = 0; j < st.omega.size(); ++j)
      emit_param(out, iter, "omega", static_cast<int>(j + 1), st.omega[j]);
  }
  atomic_write_text(path, out.str());
}

ChainOutput read_samples_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int c_it = t.require_col("iteration", path);
  const int c_par = t.require_col("parameter", path);
  const int c_idx = t.require_col("index", path);
  const int c_val = t.require_col("value", path);

  // sizes from maximum indexes
  std::map<std::string, int> maxidx;
  std::vector<long> iters;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = path + " row " + std::to_string(r + 2);
    const long it = parse_long(row[c_it], ctx);
    if (iters.empty() || iters.back() != it) iters.push_back(it);
    const int idx = static_cast<int>(parse_long(row[c_idx], ctx));
    auto& m = maxidx[row[c_par]];
    m = std::max(m, idx);
  }
  const bool linear = maxidx.count("sigma2") > 0;
  const bool fusion = maxidx.count("alpha") > 0;
  int L = 0;
  if (fusion) {
    L = static_cast<int>(std::lround(std::sqrt(static_cast<double>(maxidx["alpha"]))));
  } else if (maxidx.count("theta_tilde")) {
    L = maxidx["theta_tilde"] + 2;
  }
  const int p = maxidx.count("beta") ? maxidx["beta"] : 0;
  const int q = maxidx.count("omega") ? maxidx["omega"] : 0;
  const int A = (fusion && L > 0) ? maxidx["nu"] / L : 0;

  ChainOutput chain;
  chain.variant = linear ? ModelVariant::kLinear
                         : (fusion ? ModelVariant::kFull : ModelVariant::kMaximumObserved);
  std::map<long, std::size_t> iter_pos;
  std::vector<std::vector<double>> theta_raw, phi_raw;
  for (long it : iters)
    if (!iter_pos.count(it)) {
      iter_pos[it] = chain.samples.size();
      ParamState st;
      st.beta.assign(p, 0.0);
      st.omega.assign(q, 0.0);
      if (fusion) {
        st.phi.resize(L);
        st.nu.assign(A, std::vector<double>(L, 0.0));
        st.nu_tilde.assign(L, 0.0);
        st.alpha.assign(L, std::vector<double>(L, 0.0));
      }
      chain.samples.push_back(std::move(st));
      theta_raw.emplace_back(std::max(0, L - 2), 0.0);
      phi_raw.emplace_back(static_cast<std::size_t>(std::max(0, L)) * std::max(0, L - 2), 0.0);
    }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = path + " row " + std::to_string(r + 2);
    const std::size_t s = iter_pos[parse_long(row[c_it], ctx)];
    const int idx = static_cast<int>(parse_long(row[c_idx], ctx));
    const double v = parse_double(row[c_val], ctx);
    const std::string& par = row[c_par];
    ParamState& st = chain.samples[s];
    if (par == "beta0") st.beta0 = v;
    else if (par == "beta") st.beta[idx - 1] = v;
    else if (par == "sigma2") st.sigma2 = v;
    else if (par == "theta_tilde") theta_raw[s][idx - 1] = v;
    else if (par == "phi_tilde") phi_raw[s][idx - 1] = v;
    else if (par == "nu") st.nu[(idx - 1) / L][(idx - 1) % L] = v;
    else if (par == "nu_tilde") st.nu_tilde[idx - 1] = v;
    else if (par == "alpha") st.alpha[(idx - 1) / L][(idx - 1) % L] = v;
    else if (par == "omega0") st.omega0 = v;
    else if (par == "omega") st.omega[idx - 1] = v;
    else throw std::runtime_error(ctx + ": unknown parameter " + par);
  }
  for (std::size_t s = 0; s < chain.samples.size(); ++s) {
    if (L >= 2 && !linear) {
      chain.samples[s].theta = CutoffVector::from_raw(theta_raw[s]);
      if (fusion)
        for (int y = 0; y < L; ++y)
          chain.samples[s].phi[y] = CutoffVector::from_raw(std::vector<double>(
              phi_raw[s].begin() + static_cast<std::ptrdiff_t>(y) * (L - 2),
              phi_raw[s].begin() + static_cast<std::ptrdiff_t>(y + 1) * (L - 2)));
    }
  }
  return chain;
}

void write_y_marginals_csv(const std::string& path, const ChainOutput& chain,
                           const std::vector<std::string>& sequence_ids) {
  std::ostringstream out;
  const int L = chain.y_marginals.empty() ? 0 : static_cast<int>(chain.y_marginals.front().size());
  out << "sequence_id";
  for (int l = 1; l <= L; ++l) out << ",p" << l;
  out << "\n";
  for (std::size_t i = 0; i < chain.y_marginals.size(); ++i) {
    out << (i < sequence_ids.size() ? sequence_ids[i] : std::to_string(i + 1));
    for (double v : chain.y_marginals[i]) out << ',' << fmt_double(v);
    out << "\n";
  }
  atomic_write_text(path, out.str());
}

void write_acceptance_csv(const std::string& path, const ChainOutput& chain) {
  std::ostringstream out;
  out << "block,acceptance_rate\n";
  for (std::size_t b = 0; b < chain.block_names.size(); ++b)
    out << chain.block_names[b] << ',' << fmt_double(chain.acceptance_rates[b]) << "\n";
  atomic_write_text(path, out.str());
}

void write_transform_json(const std::string& path, const StandardizeTransform& t) {
  json j;
  j["applied"] = t.applied;
  j["mean"] = t.mean;
  j["sd"] = t.sd;
  atomic_write_text(path, j.dump(2) + "\n");
}

StandardizeTransform read_transform_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  StandardizeTransform t;
  t.applied = j.at("applied").get<bool>();
  t.mean = j.at("mean").get<std::vector<double>>();
  t.sd = j.at("sd").get<std::vector<double>>();
  return t;
}

void write_truth_json(const std::string& path, const ParamState& truth) {
  json j;
  j["beta0"] = truth.beta0;
  j["beta"] = truth.beta;
  j["theta_tilde"] = truth.theta.raw();
  json phis = json::array();
  for (const auto& cv : truth.phi) phis.push_back(cv.raw());
  j["phi_tilde"] = phis;
  j["nu"] = truth.nu;
  j["nu_tilde"] = truth.nu_tilde;
  j["alpha"] = truth.alpha;
  j["omega0"] = truth.omega0;
  j["omega"] = truth.omega;
  atomic_write_text(path, j.dump(2) + "\n");
}

ParamState read_truth_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  ParamState s;
  s.beta0 = j.at("beta0").get<double>();
  s.beta = j.at("beta").get<std::vector<double>>();
  s.theta = CutoffVector::from_raw(j.at("theta_tilde").get<std::vector<double>>());
  for (const auto& raw : j.at("phi_tilde"))
    s.phi.push_back(CutoffVector::from_raw(raw.get<std::vector<double>>()));
  s.nu = j.at("nu").get<std::vector<std::vector<double>>>();
  s.nu_tilde = j.at("nu_tilde").get<std::vector<double>>();
  s.alpha = j.at("alpha").get<std::vector<std::vector<double>>>();
  s.omega0 = j.at("omega0").get<double>();
  s.omega = j.at("omega").get<std::vector<double>>();
  return s;
}

// ---------------------------------------------------------------------------
// run configuration

std::string StudySetting::label() const {
  std::string out = setting;
  if (annotated_fraction)
    out += "_ann" + std::to_string(static_cast<int>(std::lround(*annotated_fraction * 100)));
  if (threshold) out += "_t" + std::to_string(static_cast<int>(std::lround(*threshold * 100)));
  return out;
}

void StudySetting::validate() const {
  static const std::set<std::string> known = {"linear", "maximum", "ordinal-only",
                                              "compositional-only", "full"};
  if (!known.count(setting)) throw std::runtime_error("unknown setting: " + setting);
  const bool needs_threshold = setting == "linear" || setting == "maximum";
  if (needs_threshold != threshold.has_value())
    throw std::runtime_error("setting " + setting +
                             (needs_threshold ? " requires a threshold" : " does not take a threshold"));
  if (threshold && !(*threshold > 0.0 && *threshold <= 1.0))
    throw std::runtime_error("threshold must be in (0,1]");
  if (annotated_fraction && !(*annotated_fraction >= 0.0 && *annotated_fraction <= 1.0))
    throw std::runtime_error("annotated_fraction must be in [0,1]");
}

PriorSpec PriorOverrides::build(int L, int p, int q, int A) const {
  const double acc = annotator_accuracy.value_or(0.95);
  PriorSpec spec = default_prior(L, p, q, A);
  if (acc != spec.annotator_accuracy) {
    spec.annotator_accuracy = acc;
    const auto cons = construct_accuracy_cutoffs(L, acc);
    spec.nu_tilde_centers = cons.nu_tilde;
    for (int y = 0; y < L; ++y) spec.phi_tilde_means[y] = cons.phi[y].raw();
  }
  if (beta_sd) spec.beta_sd = *beta_sd;
  if (intercept_sd) spec.intercept_sd = *intercept_sd;
  if (omega_sd) spec.omega_sd = *omega_sd;
  if (cutoff_log_var) spec.cutoff_log_var = *cutoff_log_var;
  if (nu_conditional_var) spec.nu_conditional_var = *nu_conditional_var;
  if (nu_tilde_edge_window) spec.nu_tilde_edge_window = *nu_tilde_edge_window;
  spec.validate();
  return spec;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) throw std::runtime_error("config: unknown key '" + key + "' in " + where);
  }
}

void parse_paths(const json& j, RunConfig& cfg) {
  reject_unknown(j, {"sequences", "images", "annotations", "confidences", "test_sequences",
                     "test_images", "test_annotations", "test_confidences", "grid", "samples",
                     "truth", "fit_dir", "output_dir"},
                 "paths");
  auto get = [&](const char* k, std::string& dst) {
    if (j.contains(k)) dst = j.at(k).get<std::string>();
  };
  get("sequences", cfg.train.sequences);
  get("images", cfg.train.images);
  get("annotations", cfg.train.annotations);
  get("confidences", cfg.train.confidences);
  get("test_sequences", cfg.test.sequences);
  get("test_images", cfg.test.images);
  get("test_annotations", cfg.test.annotations);
  get("test_confidences", cfg.test.confidences);
  get("grid", cfg.grid);
  get("samples", cfg.samples);
  get("truth", cfg.truth);
  get("fit_dir", cfg.fit_dir);
  get("output_dir", cfg.output_dir);
}

void parse_mcmc(const json& j, McmcConfig& m) {
  reject_unknown(j, {"iterations", "burnin", "thin", "seed", "adapt_target_block",
                     "adapt_target_univariate", "adapt_rate", "initial_step"},
                 "mcmc");
  if (j.contains("iterations")) m.iterations = j.at("iterations").get<int>();
  if (j.contains("burnin")) m.burnin = j.at("burnin").get<int>();
  if (j.contains("thin")) m.thin = j.at("thin").get<int>();
  if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("adapt_target_block")) m.adapt_target_block = j.at("adapt_target_block").get<double>();
  if (j.contains("adapt_target_univariate"))
    m.adapt_target_univariate = j.at("adapt_target_univariate").get<double>();
  if (j.contains("adapt_rate")) m.adapt_rate = j.at("adapt_rate").get<double>();
  if (j.contains("initial_step")) m.initial_step = j.at("initial_step").get<double>();
}

void parse_sim(const json& j, SimConfig& s) {
  reject_unknown(j, {"n_train", "n_test", "L", "p", "beta_true", "beta0_true", "omega0_true",
                     "omega_true", "annotators", "nu_spread", "ai_correct_confidence",
                     "annotated_fraction", "r_choices", "max_probs", "annotator_accuracy",
                     "zeta", "seed"},
                 "sim");
  if (j.contains("n_train")) s.n_train = j.at("n_train").get<int>();
  if (j.contains("n_test")) s.n_test = j.at("n_test").get<int>();
  if (j.contains("L")) s.L = j.at("L").get<int>();
  if (j.contains("p")) s.p = j.at("p").get<int>();
  if (j.contains("beta_true")) s.beta_true = j.at("beta_true").get<std::vector<double>>();
  if (j.contains("beta0_true")) s.beta0_true = j.at("beta0_true").get<double>();
  if (j.contains("omega0_true")) s.omega0_true = j.at("omega0_true").get<double>();
  if (j.contains("omega_true")) s.omega_true = j.at("omega_true").get<std::vector<double>>();
  if (j.contains("annotators")) s.annotators = j.at("annotators").get<int>();
  if (j.contains("nu_spread")) s.nu_spread = j.at("nu_spread").get<double>();
  if (j.contains("ai_correct_confidence"))
    s.ai_correct_confidence = j.at("ai_correct_confidence").get<double>();
  if (j.contains("annotated_fraction")) s.annotated_fraction = j.at("annotated_fraction").get<double>();
  if (j.contains("r_choices")) s.r_choices = j.at("r_choices").get<std::vector<int>>();
  if (j.contains("max_probs")) s.max_probs = j.at("max_probs").get<std::vector<double>>();
  if (j.contains("annotator_accuracy")) s.annotator_accuracy = j.at("annotator_accuracy").get<double>();
  if (j.contains("zeta")) s.zeta = j.at("zeta").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
}

void parse_prior(const json& j, PriorOverrides& p) {
  reject_unknown(j, {"beta_sd", "intercept_sd", "omega_sd", "cutoff_log_var", "nu_conditional_var",
                     "annotator_accuracy", "nu_tilde_edge_window"},
                 "prior");
  auto get = [&](const char* k, std::optional<double>& dst) {
    if (j.contains(k)) dst = j.at(k).get<double>();
  };
  get("beta_sd", p.beta_sd);
  get("intercept_sd", p.intercept_sd);
  get("omega_sd", p.omega_sd);
  get("cutoff_log_var", p.cutoff_log_var);
  get("nu_conditional_var", p.nu_conditional_var);
  get("annotator_accuracy", p.annotator_accuracy);
  get("nu_tilde_edge_window", p.nu_tilde_edge_window);
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j = json::parse(json_text);
  reject_unknown(j, {"mode", "setting", "threshold", "annotated_fraction", "paths", "mcmc", "sim",
                     "prior", "zeta", "max_images", "standardize", "replicates", "settings"},
                 "top level");
  RunConfig cfg;
  if (!j.contains("mode")) throw std::runtime_error("config: missing 'mode'");
  cfg.mode = j.at("mode").get<std::string>();
  if (j.contains("setting")) cfg.setting = j.at("setting").get<std::string>();
  if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
  if (j.contains("annotated_fraction")) cfg.annotated_fraction = j.at("annotated_fraction").get<double>();
  if (j.contains("paths")) parse_paths(j.at("paths"), cfg);
  if (j.contains("mcmc")) parse_mcmc(j.at("mcmc"), cfg.mcmc);
  if (j.contains("sim")) parse_sim(j.at("sim"), cfg.sim);
  if (j.contains("prior")) parse_prior(j.at("prior"), cfg.prior);
  if (j.contains("zeta")) cfg.zeta = j.at("zeta").get<double>();
  if (j.contains("max_images")) cfg.max_images = j.at("max_images").get<int>();
  if (j.contains("standardize")) cfg.standardize = j.at("standardize").get<bool>();
  if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<int>();
  if (j.contains("settings")) {
    for (const auto& e : j.at("settings")) {
      reject_unknown(e, {"setting", "threshold", "annotated_fraction"}, "settings entry");
      StudySetting st;
      st.setting = e.at("setting").get<std::string>();
      if (e.contains("threshold")) st.threshold = e.at("threshold").get<double>();
      if (e.contains("annotated_fraction"))
        st.annotated_fraction = e.at("annotated_fraction").get<double>();
      cfg.settings.push_back(std::move(st));
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void RunConfig::validate() const {
  static const std::set<std::string> modes = {"simulate", "fit", "evaluate", "predict", "study"};
  if (!modes.count(mode)) throw std::runtime_error("config: unknown mode '" + mode + "'");
  auto require_file = [](const std::string& p, const std::string& what) {
    if (p.empty()) throw std::runtime_error("config: missing path for " + what);
    if (!std::filesystem::exists(p)) throw std::runtime_error("config: " + what + " file not found: " + p);
  };
  if (!(zeta > 0.0)) throw std::runtime_error("config: zeta must be positive");
  if (max_images < 1) throw std::runtime_error("config: max_images must be >= 1");
  if (mode == "simulate") {
    sim.validate();
    if (output_dir.empty()) throw std::runtime_error("config: simulate needs output_dir");
  } else if (mode == "fit") {
    StudySetting st{setting, threshold, annotated_fraction};
    st.validate();
    mcmc.validate();
    require_file(train.sequences, "sequences");
    require_file(train.images, "images");
    if (train.annotations.empty() && train.confidences.empty())
      throw std::runtime_error("config: fit needs annotations and/or confidences");
  } else if (mode == "evaluate") {
    if (fit_dir.empty() && samples.empty())
      throw std::runtime_error("config: evaluate needs fit_dir or samples");
    require_file(train.sequences, "sequences (with true_y)");
    require_file(train.images, "images");
  } else if (mode == "predict") {
    if (fit_dir.empty() && samples.empty())
      throw std::runtime_error("config: predict needs fit_dir or samples");
    require_file(grid, "grid");
  } else { // study
    if (replicates < 1) throw std::runtime_error("config: study needs replicates >= 1");
    if (settings.empty()) throw std::runtime_error("config: study needs a settings list");
    for (const auto& st : settings) st.validate();
    sim.validate();
    mcmc.validate();
    if (output_dir.empty()) throw std::runtime_error("config: study needs output_dir");
  }
}

} // namespace bcfuse
