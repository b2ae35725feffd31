#pragma once

// JSON for operators (the model cache format) and check results.
//
// Operator document:
//   {"schema": "rlab.operator/1", "label": str, "weights": [w...],
//    "eigenvalues": [tau...], "eigenvectors": [[column 0], [column 1], ...]}
// A column holds numbers when real and [re, im] pairs otherwise. Doubles are
// written with round-trip precision.

#include <string>

#include "rlab/inequality_lab.hpp"
#include "rlab/spectral_model.hpp"

namespace rlab {

inline constexpr const char* kOperatorSchema = "rlab.operator/1";
inline constexpr const char* kReportSchema = "rlab.report/1";

std::string operator_to_json(const SpectralOperator& op);
SpectralOperator operator_from_json(const std::string& text);

void save_operator(const SpectralOperator& op, const std::string& path);
SpectralOperator load_operator(const std::string& path);

/// One JSON object on a single line.
std::string check_to_json(const CheckResult& check);
CheckResult check_from_json(const std::string& text);

}  // namespace rlab
