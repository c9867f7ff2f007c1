#include "lrd/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lrd/error.hpp"

namespace lrd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::SimplexViolation: return "SimplexViolation";
    case ErrorKind::AssumptionViolation: return "AssumptionViolation";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::HorizonExceeded: return "HorizonExceeded";
    case ErrorKind::FrontierOverflow: return "FrontierOverflow";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::PreconditionUnmet: return "PreconditionUnmet";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::SizeExceeded: return "SizeExceeded";
  }
  return "Unknown";
}

namespace {

double kernel(double p, double c, double h, double gap) {
  return p + c * std::exp((2.0 * h - 2.0) * std::log(gap));
}

void check_lengths(const RawParams& raw) {
  const std::size_t m = raw.hurst.size();
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "m must be at least 1");
  if (raw.prob.size() != m || raw.coupling.size() != m) {
    throw Error(ErrorKind::InvalidArgument, "H, p and c must all have length m");
  }
}

// Unchecked parameters may also set c_k = 0, the independent (multinomial) case.
void check_ranges(const RawParams& raw, bool strict) {
  auto in_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
  const char* names[] = {"H", "p", "c"};
  const std::vector<double>* vecs[] = {&raw.hurst, &raw.prob, &raw.coupling};
  for (int v = 0; v < 3; ++v) {
    for (std::size_t k = 0; k < vecs[v]->size(); ++k) {
      const double x = (*vecs[v])[k];
      if (!in_unit(x) && !(!strict && v == 2 && x == 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << names[v] << "_" << (k + 1) << " = " << (*vecs[v])[k] << " is outside (0,1)";
        throw Error(ErrorKind::RangeViolation, os.str());
      }
    }
  }
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ValidationReport assumption_report(const RawParams& raw) {
  ValidationReport rep;
  const std::size_t m = std::min({raw.hurst.size(), raw.prob.size(), raw.coupling.size()});
  for (std::size_t k = 0; k < m; ++k) {
    const double p = raw.prob[k], c = raw.coupling[k], h = raw.hurst[k];
    const double term = (p + c) * (p + c) / kernel(p, c, h, 2.0);
    rep.terms.push_back(term);
    rep.sum += term;
  }
  rep.passed = rep.sum < 1.0;
  return rep;
}

double scan_triple_sum(const RawParams& raw, TimeIndex horizon) {
  check_lengths(raw);
  const std::size_t m = raw.hurst.size();
  std::vector<double> g(static_cast<std::size_t>(horizon + 1) * m);
  for (std::size_t k = 0; k < m; ++k) {
    for (TimeIndex d = 1; d <= horizon; ++d) {
      g[k * (horizon + 1) + d] = kernel(raw.prob[k], raw.coupling[k], raw.hurst[k], double(d));
    }
  }
  double best = 0.0;
  for (TimeIndex span = 2; span <= horizon; ++span) {
    for (TimeIndex left = 1; left < span; ++left) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double* row = &g[k * (horizon + 1)];
        s += row[left] * row[span - left] / row[span];
      }
      best = std::max(best, s);
    }
  }
  return best;
}

ModelParams::ModelParams(const RawParams& raw, bool strict, TimeIndex gap_table)
    : raw_(raw), hurst_(raw.hurst), prob_(raw.prob), coupling_(raw.coupling) {
  check_lengths(raw);
  check_ranges(raw, strict);
  double psum = 0.0;
  for (double p : prob_) psum += p;
  p0_ = 1.0 - psum;
  if (!(p0_ > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "sum of p_k = " << psum << " leaves no mass for state 0";
    throw Error(ErrorKind::SimplexViolation, os.str());
  }
  report_ = assumption_report(raw);
  if (!report_.passed) {
    if (strict) {
      std::ostringstream os;
      os.precision(17);
      os << "sum_k (p_k+c_k)^2/(p_k+c_k 2^(2H_k-2)) = " << report_.sum << " is not below 1";
      throw Error(ErrorKind::AssumptionViolation, os.str());
    }
    tainted_ = true;
  }

  table_size_ = std::max<TimeIndex>(gap_table, 1);
  table_.resize(static_cast<std::size_t>(table_size_) * hurst_.size());
  for (std::size_t k = 0; k < hurst_.size(); ++k) {
    for (TimeIndex d = 1; d <= table_size_; ++d) {
      table_[k * table_size_ + (d - 1)] = kernel(prob_[k], coupling_[k], hurst_[k], double(d));
    }
  }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t mm = hurst_.size();
  h = fnv1a(h, &mm, sizeof mm);
  for (const auto* v : {&hurst_, &prob_, &coupling_}) {
    for (double x : *v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      h = fnv1a(h, &bits, sizeof bits);
    }
  }
  digest_ = h;
}

ModelParams ModelParams::validated(const RawParams& raw, TimeIndex gap_table) {
  return ModelParams(raw, true, gap_table);
}

ModelParams ModelParams::unchecked(const RawParams& raw, TimeIndex gap_table) {
  ModelParams out(raw, false, gap_table);
  out.tainted_ = true;
  return out;
}

double ModelParams::gap_factor_uncached(State k, TimeIndex gap) const {
  const std::size_t i = static_cast<std::size_t>(k - 1);
  return kernel(prob_[i], coupling_[i], hurst_[i], static_cast<double>(gap));
}

std::string ModelParams::digest_hex() const {
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = hex[(digest_ >> (60 - 4 * i)) & 0xF];
  buf[16] = '\0';
  return buf;
}

double l_star(const ModelParams& params, State k, std::span<const TimeIndex> ascending) {
  if (ascending.empty()) return 1.0;
  double v = params.prob(k);
  for (std::size_t j = 1; j < ascending.size(); ++j) {
    v *= params.gap_factor(k, ascending[j] - ascending[j - 1]);
  }
  return v;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::replace(v.begin(), v.end(), '[', ' ');
  std::replace(v.begin(), v.end(), ']', ' ');
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(ErrorKind::Parse, "bad number '" + tok + "' for key " + key);
    }
    out.push_back(x);
  }
  return out;
}

}  // namespace

RawParams parse_params_text(const std::string& text) {
  RawParams raw;
  long m = -1;
  bool seen[4] = {false, false, false, false};
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find_first_of("=:");
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "m") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), m);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw Error(ErrorKind::Parse, "bad integer for m: '" + value + "'");
      }
      seen[0] = true;
    } else if (key == "H") {
      raw.hurst = parse_list(key, value);
      seen[1] = true;
    } else if (key == "p") {
      raw.prob = parse_list(key, value);
      seen[2] = true;
    } else if (key == "c") {
      raw.coupling = parse_list(key, value);
      seen[3] = true;
    } else {
      throw Error(ErrorKind::Parse, "unknown key '" + key + "'");
    }
  }
  // m is optional; when present it must match the list lengths.
  if (!seen[0]) m = static_cast<long>(raw.hurst.size());
  const char* names[] = {"m", "H", "p", "c"};
  for (int i = 1; i < 4; ++i) {
    if (!seen[i]) throw Error(ErrorKind::Parse, std::string("missing key ") + names[i]);
  }
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "m must be at least 1");
  const auto mm = static_cast<std::size_t>(m);
  if (raw.hurst.size() != mm || raw.prob.size() != mm || raw.coupling.size() != mm) {
    throw Error(ErrorKind::InvalidArgument, "H, p and c must all have length m");
  }
  return raw;
}

RawParams read_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open parameter file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_params_text(ss.str());
}

std::string format_params_text(const RawParams& raw) {
  auto fmt = [](const std::vector<double>& v) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v[i]);
      if (i) out += ", ";
      out.append(buf, res.ptr);
    }
    return out;
  };
  std::string out = "m = " + std::to_string(raw.hurst.size()) + "\n";
  out += "H = " + fmt(raw.hurst) + "\n";
  out += "p = " + fmt(raw.prob) + "\n";
  out += "c = " + fmt(raw.coupling) + "\n";
  return out;
}

}  // namespace lrd
