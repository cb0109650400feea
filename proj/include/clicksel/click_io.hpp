#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "clicksel/click_encoding.hpp"

namespace clicksel {

/// Accepts three shapes:
///   {"positives": [[r, c], ...], "negatives": [[r, c], ...]}
///   {"positives": [{"row": r, "col": c}, ...], "negatives": [...]}
///   {"clicks": [{"row": r, "col": c, "polarity": "positive"|"negative"}, ...]}
/// Split forms are ordered positives first, then negatives; the "clicks"
/// form preserves interleaving.
ClickSet clicks_from_json(const nlohmann::json& json);
ClickSet parse_clicks(std::string_view text);

/// {"positives": [{"row", "col"}...], "negatives": [...]}
nlohmann::json clicks_to_json(const ClickSet& clicks);
/// {"clicks": [{"row", "col", "polarity"}...]}
nlohmann::json click_sequence_to_json(const ClickSet& clicks);

const char* to_string(Polarity polarity);
Polarity polarity_from_string(std::string_view text);

}  // namespace clicksel
