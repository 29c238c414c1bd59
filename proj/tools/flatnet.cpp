// flatnet: build, verify, probe and plot nets of k-flats for the unit cube.
//
// Exit codes: 0 ok, 1 a stabbing failure was found, 2 usage / IO / parse error.

#include "flatnet/constructions.hpp"
#include "flatnet/report.hpp"
#include "flatnet/verify.hpp"
#include "flatnet/volume.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace flatnet;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Body classes each construction is guaranteed to stab at volume >= eps.
bool guarantees(Construction c, BodyClass b) {
  switch (c) {
    case Construction::GridHyperplane:
    case Construction::RecursiveKFlat:
    case Construction::WeakNet:
      return true;
    case Construction::Ellipse2D:
    case Construction::EllipsoidDD:
      return b == BodyClass::Ellipsoid;
    case Construction::VdC:
    case Construction::HaltonHammersley:
      return b == BodyClass::Box;
    case Construction::AffineBody:
      return false;
  }
  return false;
}

ConvexPolytope<double> read_body_vertices(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open body file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw FormatError("body file: bad number in '" + line + "'");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("body file: no vertices");
  const auto d = static_cast<Eigen::Index>(rows[0].size());
  MatrixX<double> v(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (static_cast<Eigen::Index>(rows[j].size()) != d) throw FormatError("body file: ragged vertex list");
    for (Eigen::Index i = 0; i < d; ++i) v(i, static_cast<Eigen::Index>(j)) = rows[j][i];
  }
  return {v};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw FormatError("write to '" + path + "' failed");
}

struct GenerateArgs {
  int d = 2;
  int k = -1;
  std::string eps;
  std::string construction;
  std::string out;
  std::string body;
};

int cmd_generate(const GenerateArgs& a) {
  const double eps = parse_eps(a.eps);
  const int k = a.k >= 0 ? a.k : 0;
  Construction c;
  if (a.construction.empty()) {
    c = k >= 1 ? Construction::RecursiveKFlat : Construction::WeakNet;
  } else {
    const auto parsed = parse_construction(a.construction);
    if (!parsed) throw CLI::ValidationError("--construction", "unknown construction '" + a.construction + "'");
    c = *parsed;
  }
  if (k >= a.d) throw CLI::ValidationError("--k", "need 0 <= k < d");

  const auto start = std::chrono::steady_clock::now();
  Net net = [&] {
    if (c == Construction::AffineBody) {
      if (a.body.empty()) throw CLI::ValidationError("--body", "affine construction needs --body <vertex file>");
      const auto body = read_body_vertices(a.body);
      if (body.dim() != a.d) throw CLI::ValidationError("--body", "body dimension differs from --d");
      return affine_net_for_body(body, k, eps);
    }
    return build_net(c, a.d, k, eps);
  }();
  const double millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::printf("construction %s\nd %d\nk %d\neps %s\nsize %zu\n", std::string(construction_id(c)).c_str(), net.dim(),
              net.k(), format_double(net.eps()).c_str(), net.size());
  if (net.tau) std::printf("tau %d\n", *net.tau);
  if (net.levels) std::printf("levels %d\n", *net.levels);
  std::printf("build_ms %.3f\n", millis);
  if (!a.out.empty()) write_net_file(a.out, net);
  return kExitOk;
}

struct VerifyArgs {
  std::string net;
  std::string bodies = "ellipsoid";
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::string eps;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  const Net net = read_net_file(a.net);
  const auto cls = parse_body_class(a.bodies);
  if (!cls) throw CLI::ValidationError("--bodies", "expected ellipsoid, box or polytope");
  const double eps = a.eps.empty() ? net.eps() : parse_eps(a.eps);

  const bool guaranteed = guarantees(net.construction(), *cls) && eps >= net.eps();
  TrialOptions opts;
  opts.body = *cls;
  opts.trials = a.trials;
  opts.seed = a.seed;
  opts.eps = std::min(eps, max_heavy_volume(*cls, net.dim()));
  const StabIndex index(net);
  const StabReport report = run_stab_trials(index, opts);

  std::printf("bodies %s\ntrials %zu\nstabbed %zu\nfailures %zu\nseed %llu\nmode %s\n",
              std::string(body_class_id(*cls)).c_str(), report.total, report.stabbed, report.failures.size(),
              static_cast<unsigned long long>(a.seed), guaranteed ? "guarantee" : "informational");
  const nlohmann::json j = report_to_json(report, *cls, opts);
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  if (!report.failures.empty()) {
    const auto& f = report.failures.front();
    std::printf("first_failure trial %llu generator_seed %llu volume %s\n",
                static_cast<unsigned long long>(f.trial), static_cast<unsigned long long>(f.seed),
                format_double(f.target_volume).c_str());
  }
  return guaranteed && !report.failures.empty() ? kExitFailure : kExitOk;
}

struct LowerboundArgs {
  std::string net;
  std::string eps;
  std::int64_t resolution = 0;
};

int cmd_lowerbound(const LowerboundArgs& a) {
  const Net net = read_net_file(a.net);
  const double eps = a.eps.empty() ? net.eps() : parse_eps(a.eps);
  if (a.resolution != 0 && a.resolution < 2) throw CLI::ValidationError("--resolution", "must be >= 2");
  const std::int64_t res = a.resolution ? a.resolution : default_probe_resolution(net.dim(), eps);
  const ProbeResult p = adversarial_ball_probe(net, eps, res);
  std::printf("radius %s\nball_volume %s\nresolution %lld\n", format_double(p.radius).c_str(),
              format_double(p.ball_volume).c_str(), static_cast<long long>(res));
  if (!p.found) {
    std::printf("no gap found\n");
    return kExitOk;
  }
  std::printf("gap center");
  for (Eigen::Index i = 0; i < p.center->size(); ++i) std::printf(" %s", format_double((*p.center)(i)).c_str());
  std::printf("\n");
  // A ball is an ellipsoid: only nets that promise ellipsoids are broken by it.
  const bool guaranteed = eps >= net.eps() && guarantees(net.construction(), BodyClass::Ellipsoid);
  return guaranteed ? kExitFailure : kExitOk;
}

struct ScalingArgs {
  int d = 2;
  int k = 0;
  std::vector<std::string> eps;
  std::string construction;
  std::string out;
};

int cmd_scaling(const ScalingArgs& a) {
  Construction c = a.k >= 1 ? Construction::RecursiveKFlat : Construction::WeakNet;
  if (!a.construction.empty()) {
    const auto parsed = parse_construction(a.construction);
    if (!parsed || *parsed == Construction::AffineBody)
      throw CLI::ValidationError("--construction", "unsupported construction '" + a.construction + "'");
    c = *parsed;
  }
  std::vector<double> eps;
  for (const auto& s : a.eps) eps.push_back(parse_eps(s));
  const ScalingReport report = scaling_report(c, a.d, a.k, eps);
  std::ostringstream csv;
  write_scaling_csv(csv, report);
  if (a.out.empty())
    std::cout << csv.str();
  else
    write_text(a.out, csv.str());
  std::printf("slope %.6f\n", report.slope);
  return kExitOk;
}

struct PlotArgs {
  std::string net;
  std::string out;
  std::string overlay;
  std::string overlay_json;
  std::uint64_t seed = 1;
};

int cmd_plot(const PlotArgs& a) {
  const Net net = read_net_file(a.net);
  std::optional<Body> overlay;
  if (!a.overlay.empty()) {
    const auto cls = parse_body_class(a.overlay);
    if (!cls) throw CLI::ValidationError("--overlay", "expected ellipsoid, box or polytope");
    overlay = random_heavy_body(*cls, net.dim(), std::min(net.eps(), max_heavy_volume(*cls, net.dim())), a.seed);
  } else if (!a.overlay_json.empty()) {
    std::ifstream is(a.overlay_json);
    if (!is) throw FormatError("cannot open '" + a.overlay_json + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("overlay json: ") + e.what());
    }
    if (j.contains("failures")) {
      if (j["failures"].empty()) throw FormatError("overlay json: report has no failures");
      j = j["failures"][0];
    }
    overlay = body_from_json(j.contains("body") ? j["body"] : j);
  }
  const std::string svg = render_svg(net, overlay);
  write_text(a.out, svg);
  std::printf("wrote %s (%zu flats)\n", a.out.c_str(), net.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatnet: nets of k-flats stabbing heavy convex bodies in the unit cube"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Build a net and optionally write it");
  g->add_option("--d", gen.d, "Ambient dimension")->required()->check(CLI::Range(1, 64));
  g->add_option("--k", gen.k, "Flat dimension (default 0)");
  g->add_option("--eps", gen.eps, "Volume threshold, decimal or 2^-K")->required();
  g->add_option("--construction", gen.construction, "grid|rk|ellipse2d|ell-dd|weak|vdc|hh|affine");
  g->add_option("--body", gen.body, "Vertex file (one vertex per line) for --construction affine");
  g->add_option("--out", gen.out, "Net file to write");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Stab random heavy bodies with a net");
  v->add_option("net", ver.net, "Net file")->required();
  v->add_option("--bodies", ver.bodies, "ellipsoid|box|polytope");
  v->add_option("--trials", ver.trials, "Number of random bodies");
  v->add_option("--seed", ver.seed, "Base seed");
  v->add_option("--eps", ver.eps, "Body volume (default: the net's eps)");
  v->add_option("--out", ver.out, "JSON report with every failure");

  LowerboundArgs lb;
  auto* l = app.add_subcommand("lowerbound", "Search for a ball of volume eps missed by every flat");
  l->add_option("net", lb.net, "Net file")->required();
  l->add_option("--eps", lb.eps, "Ball volume (default: the net's eps)");
  l->add_option("--resolution", lb.resolution, "Grid points per axis (default ceil(4/r))");

  ScalingArgs sc;
  auto* s = app.add_subcommand("scaling", "Net size against eps, as CSV");
  s->add_option("--d", sc.d, "Ambient dimension")->required();
  s->add_option("--k", sc.k, "Flat dimension");
  s->add_option("--eps", sc.eps, "Decreasing eps values")->required();
  s->add_option("--construction", sc.construction, "Construction id");
  s->add_option("--out", sc.out, "CSV file (default stdout)");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Draw a planar net as SVG");
  p->add_option("net", pl.net, "Net file")->required();
  p->add_option("--out", pl.out, "SVG file")->required();
  p->add_option("--overlay", pl.overlay, "Draw a random heavy body of this class");
  p->add_option("--overlay-json", pl.overlay_json, "Draw a body from a JSON file (failure entry or body)");
  p->add_option("--seed", pl.seed, "Seed for --overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*v) return cmd_verify(ver);
    if (*l) return cmd_lowerbound(lb);
    if (*s) return cmd_scaling(sc);
    if (*p) return cmd_plot(pl);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
