#include "restrict_est/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace restrict_est {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_risk_csv(std::ostream& os, const RiskCurve& curve) {
  os << "lambda,estimator,mean_risk,std_err,n\n";
  for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
    for (std::size_t e = 0; e < curve.labels.size(); ++e) {
      os << format_number(curve.lambdas[j]) << ',' << curve.labels[e] << ','
         << format_number(curve.mean[j][e]) << ',' << format_number(curve.std_err[j][e]) << ','
         << curve.replications << '\n';
    }
  }
}

void write_dominance_csv(std::ostream& os, const DominanceReport& report) {
  os << "lambda,estimator,baseline,diff_mean,diff_se,flagged\n";
  for (const auto& e : report.entries) {
    os << format_number(e.lambda) << ',' << e.estimator << ',' << report.baseline << ','
       << format_number(e.diff_mean) << ',' << format_number(e.diff_se) << ','
       << (e.flagged ? 1 : 0) << '\n';
  }
}

void write_psi_csv(std::ostream& os, const std::vector<PsiRow>& rows) {
  os << "t,psi_bz,psi_stein,psi_stein_clamped,c0\n";
  for (const auto& r : rows) {
    os << format_number(r.t) << ',' << format_number(r.bz) << ',' << format_number(r.stein) << ','
       << format_number(r.stein_clamped) << ',' << format_number(r.c0) << '\n';
  }
}

void write_violations_csv(std::ostream& os, const std::vector<ConditionReport>& reports) {
  os << "quantity,component,delta,t,s_lo,s_hi,log_ratio_lo,log_ratio_hi\n";
  for (const auto& r : reports) {
    for (const auto& v : r.violations) {
      os << to_string(r.quantity) << ',' << index_of(r.component) << ','
         << format_number(v.delta) << ',' << format_number(v.t) << ',' << format_number(v.s_lo)
         << ',' << format_number(v.s_hi) << ',' << format_number(v.log_ratio_lo) << ','
         << format_number(v.log_ratio_hi) << '\n';
    }
  }
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return {buf, res.ptr};
}

}  // namespace

std::string risk_svg(const RiskCurve& curve, const std::string& title) {
  constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b"};
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  double xmin = curve.lambdas.front(), xmax = curve.lambdas.back();
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& row : curve.mean) {
    for (double v : row) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : std::max(1e-3, 0.05 * std::abs(ymax));
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" style=\"fill:#ffffff\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" style=\"font:14px sans-serif\">" << escape_xml(title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" style=\"fill:none;stroke:#444444\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    os << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << H - bottom + 18
       << "\" style=\"font:11px sans-serif;text-anchor:middle\">" << fixed(xv, 2) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fixed(sy(yv) + 4, 1)
       << "\" style=\"font:11px sans-serif;text-anchor:end\">" << fixed(yv, 4) << "</text>\n";
  }
  const char* xlabel = curve.orientation == Orientation::location ? "theta2 - theta1"
                                                                  : "theta2 / theta1";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
     << "\" style=\"font:12px sans-serif;text-anchor:middle\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
     << ")\" style=\"font:12px sans-serif;text-anchor:middle\">risk</text>\n";

  for (std::size_t e = 0; e < curve.labels.size(); ++e) {
    const char* color = colors[e % std::size(colors)];
    os << "<polyline style=\"fill:none;stroke:" << color << ";stroke-width:1.5\" points=\"";
    for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
      if (j) os << ' ';
      os << fixed(sx(curve.lambdas[j]), 2) << ',' << fixed(sy(curve.mean[j][e]), 2);
    }
    os << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(e);
    os << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 36
       << "\" y2=\"" << ly - 4 << "\" style=\"stroke:" << color << ";stroke-width:2\"/>\n";
    os << "<text x=\"" << W - right + 42 << "\" y=\"" << ly
       << "\" style=\"font:12px sans-serif\">" << escape_xml(curve.labels[e]) << " ("
       << to_string(curve.kinds[e]) << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<Observation> read_observations(std::istream& is) {
  std::vector<Observation> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    std::ostringstream err;
    err << "line " << lineno << ": ";
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      err << "expected two comma-separated values, got '" << t << "'";
      throw InputError(err.str());
    }
    Observation o{};
    if (!parse_double(trim(std::string_view(t).substr(0, comma)), o.x1) ||
        !parse_double(trim(std::string_view(t).substr(comma + 1)), o.x2)) {
      err << "cannot parse '" << t << "' as two finite numbers";
      throw InputError(err.str());
    }
    rows.push_back(o);
  }
  if (rows.empty()) throw InputError("input contains no data rows");
  return rows;
}

}  // namespace restrict_est
