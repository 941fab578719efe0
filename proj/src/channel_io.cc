#include "cogbeam/channel_io.h"

#include <json.hpp>

#include "cogbeam/error.h"

namespace cogbeam {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "cogbeam-channels/1";

json MatrixToJson(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

ComplexMatrix MatrixFromJson(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<Index>(re.size()) != rows * cols || static_cast<Index>(im.size()) != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch, "matrix entry count does not match rows*cols");
  }
  ComplexMatrix m(rows, cols);
  std::size_t pos = 0;
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r, ++pos) m(r, c) = Complex(re[pos].get<double>(), im[pos].get<double>());
  }
  return m;
}

json NestedToJson(const std::vector<std::vector<ComplexMatrix>>& mats) {
  json out = json::array();
  for (const auto& row : mats) {
    json jrow = json::array();
    for (const auto& m : row) jrow.push_back(MatrixToJson(m));
    out.push_back(jrow);
  }
  return out;
}

std::vector<std::vector<ComplexMatrix>> NestedFromJson(const json& j) {
  std::vector<std::vector<ComplexMatrix>> out;
  for (const auto& jrow : j) {
    std::vector<ComplexMatrix> row;
    for (const auto& jm : jrow) row.push_back(MatrixFromJson(jm));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string SerializeChannelSet(const ChannelSet& ch) {
  json j;
  j["format"] = kFormat;
  j["num_links"] = ch.num_links;
  j["num_pu"] = ch.num_pu;
  j["sigma2"] = ch.sigma2;
  j["p_max"] = ch.p_max;
  j["eps"] = ch.eps;
  j["cr_distance_m"] = ch.cr_distance_m;
  j["pu_distance_m"] = ch.pu_distance_m;
  j["H"] = NestedToJson(ch.H);
  j["G_hat"] = NestedToJson(ch.G_hat);
  j["G_true"] = ch.G_true ? NestedToJson(*ch.G_true) : json(nullptr);
  return j.dump(1) + "\n";
}

ChannelSet ParseChannelSet(std::string_view text) {
  ChannelSet ch;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorCode::kParseError, "unsupported channel set format");
    }
    ch.num_links = j.at("num_links").get<int>();
    ch.num_pu = j.at("num_pu").get<int>();
    ch.sigma2 = j.at("sigma2").get<std::vector<double>>();
    ch.p_max = j.at("p_max").get<std::vector<double>>();
    ch.eps = j.at("eps").get<std::vector<std::vector<double>>>();
    ch.cr_distance_m = j.value("cr_distance_m", std::vector<std::vector<double>>{});
    ch.pu_distance_m = j.value("pu_distance_m", std::vector<std::vector<double>>{});
    ch.H = NestedFromJson(j.at("H"));
    ch.G_hat = NestedFromJson(j.at("G_hat"));
    if (!j.at("G_true").is_null()) ch.G_true = NestedFromJson(j.at("G_true"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  ch.CheckShapes();
  return ch;
}

}  // namespace cogbeam
