#pragma once

#include <filesystem>
#include <string>

#include "kpst/core/rng.hpp"
#include "kpst/data/image.hpp"
#include "kpst/landmarks/landmark_set.hpp"

namespace kpst::data {

// Procedural frontal face: ellipse head on a plain background, rectangles
// for eyes/brows/nose/lips; the portrait domain adds a Gat (hat) band above
// the brows. Landmarks are known analytically from the drawn geometry.
struct SyntheticFace {
  RawImage image;
  landmarks::LandmarkSet lm;
};

SyntheticFace make_synthetic_face(int size, uint64_t seed, Domain domain,
                                  const std::string& id);

// Writes root/{x,y}/{train,test}/*.png plus landmarks_truth.json with the
// analytic annotations for every image.
void write_synthetic_dataset(const std::filesystem::path& root, int train_pairs, int test_pairs,
                             int size, uint64_t seed);

}  // namespace kpst::data
