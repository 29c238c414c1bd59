#pragma once

#include "flatnet/net.hpp"
#include "flatnet/verify.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace flatnet {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kNetFileMagic = "flatnet-netfile";
inline constexpr int kNetFileVersion = 1;

/// Text net format:
///
///   flatnet-netfile 1
///   d <int>
///   k <int>
///   eps <%.17g>
///   construction <id>
///   count <int>
///   [tau <int>]
///   [levels <int>]
///   data
///   <one record per line: d base coordinates then k*d basis coordinates>
void write_net(std::ostream& os, const Net& net);
Net read_net(std::istream& is);
void write_net_file(const std::string& path, const Net& net);
Net read_net_file(const std::string& path);

/// 17 significant digits (printf %.17g); parses back to the same double.
std::string format_double(double v);

/// Accepts a decimal ("0.015625", "1e-3") or "2^-K" with integer K.
double parse_eps(std::string_view text);

/// eps,size,slope_so_far,millis
void write_scaling_csv(std::ostream& os, const ScalingReport& report);

nlohmann::json body_to_json(const Body& body);
Body body_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const StabReport& report, BodyClass body, const TrialOptions& opts);

/// 512 x 512 SVG 1.1 drawing of a planar net in the unit square (y up):
/// points as dots, lines clipped to the square, optional body outlined.
std::string render_svg(const Net& net, const std::optional<Body>& overlay = std::nullopt);

}  // namespace flatnet
