#pragma once

// JSON helpers shared by the serialization and report code. Non-finite
// doubles are written as the strings "inf", "-inf" and "nan".

#include <string>

#include "json.hpp"
#include "rlab/inequality_lab.hpp"

namespace rlab {

std::string read_text_file(const std::string& path);

nlohmann::json number(double x);
double number_from(const nlohmann::json& j);

nlohmann::json bracket_json(const NormBracket& b);
NormBracket bracket_from(const nlohmann::json& j);

nlohmann::json check_json(const CheckResult& c);
CheckResult check_from(const nlohmann::json& j);

}  // namespace rlab
