#include "flatnet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace flatnet {

std::string format_double(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  s = trim(s);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError("cannot parse " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

// "key value" header line.
std::string_view header_value(const std::string& line, std::string_view key) {
  const std::string_view s = trim(line);
  if (s.size() <= key.size() || s.substr(0, key.size()) != key || s[key.size()] != ' ')
    throw FormatError("net file: expected '" + std::string(key) + " <value>', got '" + std::string(s) + "'");
  return trim(s.substr(key.size() + 1));
}

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line))
    if (!trim(line).empty()) return true;
  return false;
}

}  // namespace

void write_net(std::ostream& os, const Net& net) {
  os << kNetFileMagic << ' ' << kNetFileVersion << '\n';
  os << "d " << net.dim() << '\n';
  os << "k " << net.k() << '\n';
  os << "eps " << format_double(net.eps()) << '\n';
  os << "construction " << construction_id(net.construction()) << '\n';
  os << "count " << net.size() << '\n';
  if (net.tau) os << "tau " << *net.tau << '\n';
  if (net.levels) os << "levels " << *net.levels << '\n';
  os << "data\n";
  std::string line;
  char buf[40];
  for (std::size_t i = 0; i < net.size(); ++i) {
    line.clear();
    for (double v : net.record(i)) {
      if (!line.empty()) line.push_back(' ');
      const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
      line.append(buf, static_cast<std::size_t>(n));
    }
    line.push_back('\n');
    os << line;
  }
  if (!os) throw FormatError("net file: write failed");
}

Net read_net(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw FormatError("net file: empty input");
  {
    const std::string_view version = header_value(line, kNetFileMagic);
    if (parse_number<int>(version, "format version") != kNetFileVersion)
      throw FormatError("net file: unsupported format version " + std::string(version));
  }
  auto expect = [&](std::string_view key) {
    if (!next_line(is, line)) throw FormatError("net file: truncated header");
    return header_value(line, key);
  };
  const int d = parse_number<int>(expect("d"), "d");
  const int k = parse_number<int>(expect("k"), "k");
  const double eps = parse_number<double>(expect("eps"), "eps");
  const std::string id(expect("construction"));
  const auto count = parse_number<std::size_t>(expect("count"), "count");
  if (d < 1 || k < 0 || k >= d) throw FormatError("net file: need d >= 1 and 0 <= k < d");
  if (!(eps > 0) || !std::isfinite(eps)) throw FormatError("net file: eps must be positive");
  const auto construction = parse_construction(id);
  if (!construction) throw FormatError("net file: unknown construction '" + id + "'");

  Net net(d, k, eps, *construction);
  while (true) {
    if (!next_line(is, line)) throw FormatError("net file: missing 'data' line");
    const std::string_view s = trim(line);
    if (s == "data") break;
    if (s.starts_with("tau "))
      net.tau = parse_number<int>(s.substr(4), "tau");
    else if (s.starts_with("levels "))
      net.levels = parse_number<int>(s.substr(7), "levels");
    else
      throw FormatError("net file: unexpected header line '" + std::string(s) + "'");
  }

  const std::size_t stride = net.stride();
  std::vector<double> data;
  data.reserve(count * stride);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (rows == count) throw FormatError("net file: more records than count");
    std::size_t fields = 0;
    const char* p = s.data();
    const char* end = s.data() + s.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      double v;
      const auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t'))
        throw FormatError("net file: bad number in record " + std::to_string(rows));
      if (!std::isfinite(v)) throw FormatError("net file: non-finite value in record " + std::to_string(rows));
      data.push_back(v);
      ++fields;
      p = q;
    }
    if (fields != stride)
      throw FormatError("net file: record " + std::to_string(rows) + " has " + std::to_string(fields) +
                        " values, expected " + std::to_string(stride));
    ++rows;
  }
  if (rows != count) throw FormatError("net file: count says " + std::to_string(count) + ", found " + std::to_string(rows));
  net.assign(std::move(data));
  return net;
}

void write_net_file(const std::string& path, const Net& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_net(os, net);
}

Net read_net_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_net(is);
}

double parse_eps(std::string_view text) {
  const std::string_view s = trim(text);
  double v;
  if (s.starts_with("2^")) {
    const int e = parse_number<int>(s.substr(2), "exponent");
    v = std::ldexp(1.0, e);
  } else {
    v = parse_number<double>(s, "eps");
  }
  if (!(v > 0) || !std::isfinite(v)) throw FormatError("eps must be positive and finite");
  return v;
}

void write_scaling_csv(std::ostream& os, const ScalingReport& report) {
  os << "eps,size,slope_so_far,millis\n";
  char buf[64];
  for (const auto& row : report.rows) {
    os << format_double(row.eps) << ',' << row.size << ',';
    if (row.slope_so_far) {
      std::snprintf(buf, sizeof buf, "%.6f", *row.slope_so_far);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.3f", row.millis);
    os << ',' << buf << '\n';
  }
}

// ---- JSON -----------------------------------------------------------------------

namespace {

nlohmann::json vec_json(const VectorX<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const MatrixX<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

VectorX<double> json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorX<double>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MatrixX<double> json_mat(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("json: expected a nonempty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixX<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const VectorX<double> r = json_vec(j[i]);
    if (r.size() != cols) throw FormatError("json: ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

}  // namespace

nlohmann::json body_to_json(const Body& body) {
  return std::visit(
      [](const auto& b) -> nlohmann::json {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Ellipsoid<double>>)
          return {{"type", "ellipsoid"}, {"center", vec_json(b.center)}, {"shape", mat_json(b.shape)}};
        else if constexpr (std::is_same_v<B, AxisBox<double>>)
          return {{"type", "box"}, {"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}};
        else
          return {{"type", "polytope"}, {"vertices", mat_json(b.vertices.transpose())}};
      },
      body);
}

Body body_from_json(const nlohmann::json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "ellipsoid") {
      Ellipsoid<double> e{json_vec(j.at("center")), json_mat(j.at("shape"))};
      check_ellipsoid(e);
      return e;
    }
    if (type == "box") {
      AxisBox<double> b{json_vec(j.at("lo")), json_vec(j.at("hi"))};
      if (b.lo.size() != b.hi.size()) throw FormatError("json: box lo/hi size mismatch");
      return b;
    }
    if (type == "polytope") return ConvexPolytope<double>{json_mat(j.at("vertices")).transpose()};
    throw FormatError("json: unknown body type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("json: ") + e.what());
  } catch (const GeometryError& e) {
    throw FormatError(std::string("json: ") + e.what());
  }
}

nlohmann::json report_to_json(const StabReport& report, BodyClass body, const TrialOptions& opts) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"trial", f.trial},
                        {"generator_seed", f.seed},
                        {"target_volume", f.target_volume},
                        {"body", body_to_json(f.body)}});
  }
  return {{"bodies", std::string(body_class_id(body))},
          {"seed", opts.seed},
          {"eps", opts.eps},
          {"total", report.total},
          {"stabbed", report.stabbed},
          {"failures", failures}};
}

// ---- SVG -------------------------------------------------------------------------

namespace {

constexpr double kCanvas = 512.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

double sx(double x) { return x * kCanvas; }
double sy(double y) { return (1.0 - y) * kCanvas; }

// Liang-Barsky: parameter range of p + t u inside [0,1]^2.
std::optional<std::pair<double, double>> clip_line(const Eigen::Vector2d& p, const Eigen::Vector2d& u) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    if (u(i) == 0.0) {
      if (p(i) < 0.0 || p(i) > 1.0) return std::nullopt;
      continue;
    }
    double a = (0.0 - p(i)) / u(i);
    double b = (1.0 - p(i)) / u(i);
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

std::vector<Eigen::Vector2d> hull_2d(const MatrixX<double>& v) {
  std::vector<Eigen::Vector2d> p;
  for (Eigen::Index i = 0; i < v.cols(); ++i) p.emplace_back(v(0, i), v(1, i));
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1)); });
  if (p.size() < 3) return p;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
  };
  std::vector<Eigen::Vector2d> h(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], q) <= 0) --k;
    h[k++] = q;
  }
  for (std::size_t i = p.size() - 1, lo = k + 1; i > 0; --i) {
    while (k >= lo && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

void render_body(std::ostream& os, const Body& body) {
  const char* style = R"( fill="none" stroke="#d62728" stroke-width="1.5")";
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Ellipsoid<double>>) {
          const Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(b.shape);
          const Eigen::Vector2d a = es.eigenvectors().col(0);
          const double r0 = 1.0 / std::sqrt(es.eigenvalues()(0));
          const double r1 = 1.0 / std::sqrt(es.eigenvalues()(1));
          // y is flipped on the canvas, which negates the angle.
          const double angle = -std::atan2(a(1), a(0)) * 180.0 / std::acos(-1.0);
          os << "  <ellipse cx=\"" << fmt(sx(b.center(0))) << "\" cy=\"" << fmt(sy(b.center(1))) << "\" rx=\""
             << fmt(r0 * kCanvas) << "\" ry=\"" << fmt(r1 * kCanvas) << "\" transform=\"rotate(" << fmt(angle) << ' '
             << fmt(sx(b.center(0))) << ' ' << fmt(sy(b.center(1))) << ")\"" << style << "/>\n";
        } else if constexpr (std::is_same_v<B, AxisBox<double>>) {
          os << "  <rect x=\"" << fmt(sx(b.lo(0))) << "\" y=\"" << fmt(sy(b.hi(1))) << "\" width=\""
             << fmt((b.hi(0) - b.lo(0)) * kCanvas) << "\" height=\"" << fmt((b.hi(1) - b.lo(1)) * kCanvas) << "\""
             << style << "/>\n";
        } else {
          os << "  <polygon points=\"";
          bool first = true;
          for (const auto& q : hull_2d(b.vertices)) {
            os << (first ? "" : " ") << fmt(sx(q(0))) << ',' << fmt(sy(q(1)));
            first = false;
          }
          os << "\"" << style << "/>\n";
        }
      },
      body);
}

}  // namespace

std::string render_svg(const Net& net, const std::optional<Body>& overlay) {
  if (net.dim() != 2) throw FormatError("plot: only d = 2 nets can be drawn (got d = " + std::to_string(net.dim()) + ")");
  if (overlay && std::visit([](const auto& b) { return b.dim(); }, *overlay) != 2)
    throw FormatError("plot: overlay body must be planar");

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"512\" height=\"512\" viewBox=\"0 0 512 512\">\n"
     << "  <rect x=\"0\" y=\"0\" width=\"512\" height=\"512\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    const FlatView f = net.flat(i);
    if (net.k() == 0) {
      os << "  <circle cx=\"" << fmt(sx(f.base(0))) << "\" cy=\"" << fmt(sy(f.base(1))) << "\" r=\"2\" fill=\"black\"/>\n";
      continue;
    }
    const Eigen::Vector2d p = f.base;
    const Eigen::Vector2d u = f.basis.col(0);
    const auto seg = clip_line(p, u);
    if (!seg) continue;
    const Eigen::Vector2d a = p + seg->first * u;
    const Eigen::Vector2d b = p + seg->second * u;
    os << "  <line x1=\"" << fmt(sx(a(0))) << "\" y1=\"" << fmt(sy(a(1))) << "\" x2=\"" << fmt(sx(b(0))) << "\" y2=\""
       << fmt(sy(b(1))) << "\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
  }
  if (overlay) render_body(os, *overlay);
  os << "</svg>\n";
  return os.str();
}

}  // namespace flatnet
