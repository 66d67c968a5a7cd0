#pragma once

#include <optional>
#include <string>

#include "anosov_lab/group.hpp"
#include "anosov_lab/replin.hpp"

namespace alab {

// Enumeration cache: ball normal forms (as the prefix tree) plus per-element spectra, keyed by
// content hashes of the presentation and representation texts and the radius. Native byte order.
struct CacheKey {
  std::string presentation_hash;
  std::string representation_hash;  // empty for a bare ball
  int depth = 0;
  bool jordan = false;
  bool attractors = false;
};

struct CachedBall {
  Ball ball;
  BallSpectra spectra;  // empty when the key has no representation
};

CacheKey make_cache_key(const Presentation& p, const Representation* rho, int depth, const SpectraOptions& opts = {});
std::string cache_file_name(const CacheKey& key);

// Atomic (write-temp-rename).
void save_cache(const std::string& path, const CacheKey& key, const CachedBall& data);
// nullopt when the file is missing, truncated, of another format version, or keyed differently.
std::optional<CachedBall> load_cache(const std::string& path, const CacheKey& key);

}  // namespace alab
