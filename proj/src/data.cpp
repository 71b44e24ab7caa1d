#include "intcens/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace intcens {

void validate(const Observation2& obs) {
  if (!std::isfinite(obs.u) || !std::isfinite(obs.v)) throw Error("times must be finite");
  if (obs.u < 0.0) throw Error("u must be >= 0");
  if (!(obs.u < obs.v)) throw Error("u must be < v");
  if ((obs.d0 != 0 && obs.d0 != 1) || (obs.d1 != 0 && obs.d1 != 1))
    throw Error("indicators must be 0 or 1");
  if (obs.d0 + obs.d1 > 1) throw Error("d0 + d1 must be <= 1");
}

Sample2::Sample2(std::vector<Observation2> obs, std::optional<double> upper) : obs_(std::move(obs)) {
  if (obs_.empty()) throw Error("empty sample");
  double vmax = 0.0;
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    try {
      validate(obs_[i]);
    } catch (const Error& e) {
      throw Error("observation " + std::to_string(i + 1) + ": " + e.what());
    }
    vmax = std::max(vmax, obs_[i].v);
  }
  upper_ = upper.value_or(vmax);
  if (upper_ < vmax) throw Error("upper endpoint M is below the largest v");

  const std::size_t n = obs_.size();
  std::vector<GridRef> all;
  all.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    all.push_back({static_cast<Index>(i), Endpoint::U});
    all.push_back({static_cast<Index>(i), Endpoint::V});
  }
  auto time_of = [this](const GridRef& r) {
    const auto& o = obs_[static_cast<std::size_t>(r.obs)];
    return r.end == Endpoint::U ? o.u : o.v;
  };
  std::stable_sort(all.begin(), all.end(),
                   [&](const GridRef& a, const GridRef& b) { return time_of(a) < time_of(b); });

  u_idx_.assign(n, 0);
  v_idx_.assign(n, 0);
  std::vector<double> times;
  times.reserve(2 * n);
  ref_offsets_.reserve(2 * n + 1);
  for (std::size_t p = 0; p < all.size(); ++p) {
    const double t = time_of(all[p]);
    if (times.empty() || t != times.back()) {
      times.push_back(t);
      ref_offsets_.push_back(static_cast<Index>(p));
    }
    const Index k = static_cast<Index>(times.size()) - 1;
    if (all[p].end == Endpoint::U)
      u_idx_[static_cast<std::size_t>(all[p].obs)] = k;
    else
      v_idx_[static_cast<std::size_t>(all[p].obs)] = k;
  }
  ref_offsets_.push_back(static_cast<Index>(all.size()));
  refs_ = std::move(all);
  times_ = Eigen::Map<const VectorXd>(times.data(), static_cast<Index>(times.size()));
}

std::span<const GridRef> Sample2::refs(Index k) const {
  const auto b = static_cast<std::size_t>(ref_offsets_[static_cast<std::size_t>(k)]);
  const auto e = static_cast<std::size_t>(ref_offsets_[static_cast<std::size_t>(k) + 1]);
  return {refs_.data() + b, e - b};
}

// ---------------------------------------------------------------------------

StepDistribution::StepDistribution(VectorXd knots, VectorXd values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) throw Error("knots and values differ in length");
  for (Index j = 0; j < knots_.size(); ++j) {
    if (!(values_[j] >= 0.0 && values_[j] <= 1.0)) throw Error("distribution values must lie in [0,1]");
    if (j > 0) {
      if (!(knots_[j] > knots_[j - 1])) throw Error("knots must be strictly increasing");
      if (values_[j] < values_[j - 1]) throw Error("distribution values must be nondecreasing");
    }
  }
}

StepDistribution StepDistribution::on_grid(const Sample2& sample, VectorXd values) {
  if (values.size() != sample.grid_size()) throw Error("value vector does not match the grid");
  values = values.cwiseMax(0.0).cwiseMin(1.0);
  return StepDistribution(sample.times(), std::move(values));
}

double StepDistribution::operator()(double t) const {
  const double* b = knots_.data();
  const double* e = b + knots_.size();
  const double* it = std::upper_bound(b, e, t);
  if (it == b) return 0.0;
  return values_[it - b - 1];
}

VectorXd StepDistribution::operator()(const VectorXd& t) const {
  VectorXd out(t.size());
  for (Index i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
  return out;
}

StepDistribution::Masses StepDistribution::masses() const {
  std::vector<double> pts;
  std::vector<double> ms;
  double prev = 0.0;
  for (Index j = 0; j < knots_.size(); ++j) {
    const double jump = values_[j] - prev;
    if (jump > 0.0) {
      pts.push_back(knots_[j]);
      ms.push_back(jump);
    }
    prev = values_[j];
  }
  Masses out;
  out.points = Eigen::Map<const VectorXd>(pts.data(), static_cast<Index>(pts.size()));
  out.masses = Eigen::Map<const VectorXd>(ms.data(), static_cast<Index>(ms.size()));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_indicator(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Sample2 parse_csv(std::istream& in, std::optional<double> upper) {
  std::vector<Observation2> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    auto fail = [&](const std::string& why) -> Error {
      return Error("row " + std::to_string(lineno) + ": " + why);
    };

    double u = 0.0;
    double v = 0.0;
    const bool numeric_head = fields.size() >= 2 && parse_number(fields[0], u) && parse_number(fields[1], v);
    if (first && !numeric_head) {
      first = false;
      continue;  // header
    }
    first = false;
    if (fields.size() != 3 && fields.size() != 4) throw fail("expected 3 or 4 columns");
    if (!numeric_head) throw fail("malformed time value");

    Observation2 obs{u, v, 0, 0};
    if (fields.size() == 4) {
      if (!parse_indicator(fields[2], obs.d0) || !parse_indicator(fields[3], obs.d1))
        throw fail("malformed indicator");
    } else {
      double x = 0.0;
      if (!parse_number(fields[2], x)) throw fail("malformed latent time");
      obs.d0 = x <= u ? 1 : 0;
      obs.d1 = (u < x && x <= v) ? 1 : 0;
    }
    try {
      validate(obs);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    rows.push_back(obs);
  }
  return Sample2(std::move(rows), upper);
}

Sample2 ingest_csv(const std::string& path, std::optional<double> upper) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_csv(in, upper);
}

std::vector<CurrentStatusObservation> parse_current_status_csv(std::istream& in) {
  std::vector<CurrentStatusObservation> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    CurrentStatusObservation o{};
    const bool ok = fields.size() == 2 && parse_number(fields[0], o.t) && parse_indicator(fields[1], o.delta);
    if (first && !ok && !(fields.size() >= 1 && parse_number(fields[0], o.t))) {
      first = false;
      continue;
    }
    first = false;
    const std::string where = "row " + std::to_string(lineno) + ": ";
    if (!ok) throw Error(where + "expected t,delta");
    if (!(o.t >= 0.0) || !std::isfinite(o.t)) throw Error(where + "t must be finite and >= 0");
    if (o.delta != 0 && o.delta != 1) throw Error(where + "delta must be 0 or 1");
    rows.push_back(o);
  }
  if (rows.empty()) throw Error("empty sample");
  return rows;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_csv(const Sample2& sample, std::ostream& out) {
  for (const auto& o : sample.observations())
    out << format_double(o.u) << ',' << format_double(o.v) << ',' << o.d0 << ',' << o.d1 << '\n';
}

void write_step_csv(const StepDistribution& F, std::ostream& out) {
  out << "t,F\n";
  for (Index j = 0; j < F.size(); ++j)
    out << format_double(F.knots()[j]) << ',' << format_double(F.values()[j]) << '\n';
}

StepDistribution read_step_csv(std::istream& in) {
  std::vector<double> t;
  std::vector<double> f;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    double a = 0.0;
    double b = 0.0;
    const bool ok = fields.size() == 2 && parse_number(fields[0], a) && parse_number(fields[1], b);
    if (first && !ok) {
      first = false;
      continue;
    }
    first = false;
    if (!ok) throw Error("row " + std::to_string(lineno) + ": expected t,F");
    t.push_back(a);
    f.push_back(b);
  }
  return StepDistribution(Eigen::Map<const VectorXd>(t.data(), static_cast<Index>(t.size())),
                          Eigen::Map<const VectorXd>(f.data(), static_cast<Index>(f.size())));
}

}  // namespace intcens
