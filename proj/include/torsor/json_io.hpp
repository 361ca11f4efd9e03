#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "torsor/exact.hpp"
#include "torsor/gluing.hpp"
#include "torsor/hilbert_complex.hpp"
#include "torsor/simplicial.hpp"

namespace torsor::io {

using nlohmann::json;

/// Kind of document a JSON file holds, detected from its keys.
enum class JsonKind { complex_data, ses, gluing, triangulation, unknown };
JsonKind detect_kind(const json& j);

/// {"rows": n, "cols": m, "re": [...], "im": [...]}, row-major, "im" optional.
Matrix matrix_from_json(const json& j);
json matrix_to_json(const Matrix& m);

/// {"dims": [...], "diffs": [Matrix...], "grams": [Matrix...] (optional)}
HilbertComplex complex_from_json(const json& j);
json complex_to_json(const HilbertComplex& c);

/// {"A": complex, "C": complex, "B": complex, "alpha": [Matrix...], "beta": [Matrix...]}
ShortExactSequence ses_from_json(const json& j);
json ses_to_json(const ShortExactSequence& s);

/// {"C1":..., "C2":..., "B":..., "r1": [...], "r2": [...], "partial_isometry": bool}
GluingData gluing_from_json(const json& j);
json gluing_to_json(const GluingData& g);

/// {"vertices": n, "simplices": [[v...],...],
///  "local_system": {"fiber": k, "edges": {"i-j": Matrix}} (optional)}
std::pair<SimplicialComplex, LocalSystem> triangulation_from_json(const json& j);
json triangulation_to_json(const SimplicialComplex& k, const LocalSystem& l);

/// File helpers; parse failures surface as IoError.
json parse(const std::string& text);
json load_file(const std::string& path);
void save_file(const std::string& path, const std::string& contents);

}  // namespace torsor::io
