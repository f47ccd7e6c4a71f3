// Scratch diagnostic: per-group landmark error of the detector against the
// synthetic annotation.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "kpst/data/image.hpp"
#include "kpst/data/synthetic.hpp"
#include "kpst/landmarks/detector.hpp"

using namespace kpst;

int main(int argc, char** argv) {
  int size = argc > 1 ? std::atoi(argv[1]) : 256;
  uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  int dom = argc > 3 ? std::atoi(argv[3]) : 0;
  float amount = argc > 4 ? std::strtof(argv[4], nullptr) : 1.5f;

  auto domain = dom ? data::Domain::Y_portrait : data::Domain::X_photo;
  data::SyntheticFace f = data::make_synthetic_face(size, seed, domain, "dbg");
  data::RawImage img = amount > 1.0f ? data::sharpen_high_boost(f.image, amount) : f.image;
  auto lm = landmarks::detect_landmarks(img);
  if (!lm) {
    std::printf("no face detected\n");
    return 1;
  }
  const char* group[68];
  for (int i = 0; i < 17; ++i) group[i] = "jaw";
  for (int i = 17; i < 27; ++i) group[i] = "brow";
  for (int i = 27; i < 36; ++i) group[i] = "nose";
  for (int i = 36; i < 48; ++i) group[i] = "eye";
  for (int i = 48; i < 68; ++i) group[i] = "lip";
  double se = 0.0;
  for (int i = 0; i < 68; ++i) {
    double dx = lm->x(i) - f.lm.x(i);
    double dy = lm->y(i) - f.lm.y(i);
    se += dx * dx + dy * dy;
    std::printf("%2d %-4s det=(%7.2f,%7.2f) ref=(%7.2f,%7.2f) d=(%+6.2f,%+6.2f)\n", i, group[i],
                lm->x(i), lm->y(i), f.lm.x(i), f.lm.y(i), dx, dy);
  }
  std::printf("rms = %.3f\n", std::sqrt(se / 68.0));
  return 0;
}
