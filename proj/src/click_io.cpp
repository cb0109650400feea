#include "clicksel/click_io.hpp"

namespace clicksel {

const char* to_string(Polarity polarity) {
  return polarity == Polarity::positive ? "positive" : "negative";
}

Polarity polarity_from_string(std::string_view text) {
  if (text == "positive" || text == "pos" || text == "1") return Polarity::positive;
  if (text == "negative" || text == "neg" || text == "0") return Polarity::negative;
  fail(ErrorCode::invalid_argument, "unknown polarity '" + std::string(text) + "'");
}

namespace {

Click click_from(const nlohmann::json& item, Polarity polarity) {
  if (item.is_array()) {
    if (item.size() != 2) fail(ErrorCode::invalid_argument, "click arrays must be [row, col]");
    return {item[0].get<int>(), item[1].get<int>(), polarity};
  }
  if (item.is_object()) return {item.at("row").get<int>(), item.at("col").get<int>(), polarity};
  fail(ErrorCode::invalid_argument, "click must be [row, col] or {row, col}");
}

}  // namespace

ClickSet clicks_from_json(const nlohmann::json& json) {
  try {
    ClickSet out;
    if (!json.is_object()) fail(ErrorCode::invalid_argument, "clicks must be a JSON object");
    if (json.contains("clicks")) {
      for (const auto& item : json.at("clicks")) {
        const auto polarity = polarity_from_string(item.at("polarity").get<std::string>());
        out.add(click_from(item, polarity));
      }
      return out;
    }
    if (json.contains("positives"))
      for (const auto& item : json.at("positives")) out.add(click_from(item, Polarity::positive));
    if (json.contains("negatives"))
      for (const auto& item : json.at("negatives")) out.add(click_from(item, Polarity::negative));
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed clicks JSON: ") + e.what());
  }
}

ClickSet parse_clicks(std::string_view text) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("clicks are not valid JSON: ") + e.what());
  }
  return clicks_from_json(json);
}

nlohmann::json clicks_to_json(const ClickSet& clicks) {
  nlohmann::json j = {{"positives", nlohmann::json::array()}, {"negatives", nlohmann::json::array()}};
  for (const auto& c : clicks.sequence())
    j[c.positive() ? "positives" : "negatives"].push_back({{"row", c.row}, {"col", c.col}});
  return j;
}

nlohmann::json click_sequence_to_json(const ClickSet& clicks) {
  nlohmann::json j = {{"clicks", nlohmann::json::array()}};
  for (const auto& c : clicks.sequence())
    j["clicks"].push_back({{"row", c.row}, {"col", c.col}, {"polarity", to_string(c.polarity)}});
  return j;
}

}  // namespace clicksel
