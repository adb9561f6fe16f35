#pragma once

#include <string>
#include <vector>

#include "hfnerf/camera.hpp"
#include "hfnerf/geometry.hpp"
#include "hfnerf/image.hpp"

namespace hfnerf {

// Pixel-aligned feature grid, float32 channels, row-major [height][width][dim].
// Texel (ix, iy) covers [ix, ix+1) x [iy, iy+1); its center is (ix+0.5, iy+0.5).
struct FeatureMap {
    int width = 0, height = 0, dim = 0;
    std::vector<float> values;
    std::string source_view;  // free-form camera identifier, not serialized

    const float* texel(int ix, int iy) const {
        return values.data() + (static_cast<std::size_t>(iy) * width + ix) * dim;
    }
};

// Conditioning inputs of the field network for one sample point.
struct EncodedPoint {
    std::vector<double> gamma_x;  // 3 + 6*L_x
    std::vector<double> gamma_d;  // 3 + 6*L_d
    std::vector<double> feature;  // F_dim
};

// [p, sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^{L-1} pi p), cos(2^{L-1} pi p)],
// length 3 + 6L. The raw point is always included.
std::vector<double> positional_encode(const Vec3& p, int L);

// Stand-in for a pretrained image encoder: 9 channels = RGB at full
// resolution, RGB box-downsampled x4 then bilinearly upsampled back, and the
// same at x16. Deterministic; lets the whole pipeline run without external
// weights while real features can still be supplied via the HFFEAT1 format.
FeatureMap builtin_pyramid_encoder(const Image& image);

// Bilinear lookup at (u, v) in corner-frame coordinates (valid area
// [0,width] x [0,height], clamp-to-edge inside it); outside -> zero vector.
std::vector<double> sample_feature(const FeatureMap& fm, double u, double v);

// Projects x into source_cam and samples the map at the projected pixel.
// Behind-camera or outside the image -> zero vector.
std::vector<double> point_feature(const Vec3& x, const Camera& source_cam, const FeatureMap& fm);

// File layout: magic "HFFEAT1\n", u32 width/height/dim, then row-major f32
// values, everything little-endian. Bit-exact round-trip.
void save_feature_map(const std::string& path, const FeatureMap& fm);
FeatureMap load_feature_map(const std::string& path);

}  // namespace hfnerf
