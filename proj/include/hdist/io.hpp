// JSON and CSV formats for jets, spectra, chains, endomorphisms and results.

#ifndef HDIST_IO_HPP
#define HDIST_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdist/chain.hpp"
#include "hdist/normalform.hpp"
#include "hdist/orbit.hpp"
#include "hdist/projective.hpp"
#include "hdist/spectrum.hpp"

namespace hdist {

using Json = nlohmann::ordered_json;

Json jet_to_json(const JetMap& j);
JetMap jet_from_json(const Json& j);

Json spectrum_to_json(const LyapunovSpectrum& s);
LyapunovSpectrum spectrum_from_json(const Json& j);

/// Flat object: the numeric constants followed by one boolean per inequality.
Json params_to_json(const ConstraintParams& c);

Json chain_to_json(const ContractionChain& c);
ContractionChain chain_from_json(const Json& j);

/// Endomorphism file: the map plus the orbit set-up.
struct EndomorphismInput {
  ProjectiveEndomorphism f;
  ProjPoint point;                          // x_0; defaults to [0 : ... : 0 : 1]
  std::optional<LyapunovSpectrum> spectrum;
  BranchRule rule = BranchRule::Seeded;
  std::optional<ProjPoint> equilibrium_seed;  // repelling experiment; defaults to point
};

Json endomorphism_to_json(const EndomorphismInput& e);
EndomorphismInput endomorphism_from_json(const Json& j);

/// Reads and parses a JSON file; InputError on I/O or syntax problems.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Shortest round-trip decimal of a double.
std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace hdist

#endif  // HDIST_IO_HPP
