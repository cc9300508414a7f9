#include "temporalot/encoder.hpp"

#include <cmath>
#include <random>

#include "temporalot/error.hpp"

namespace temporalot {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::identity: return "identity";
    case EncoderKind::precomputed: return "precomputed";
    case EncoderKind::random_projection: return "random_projection";
    case EncoderKind::place_cells: return "place_cells";
  }
  return "unknown";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "identity") return EncoderKind::identity;
  if (name == "precomputed") return EncoderKind::precomputed;
  if (name == "random_projection") return EncoderKind::random_projection;
  if (name == "place_cells") return EncoderKind::place_cells;
  throw ArgumentError("unknown encoder kind '" + std::string(name) + "'");
}

void EncoderSpec::validate() const {
  switch (kind) {
    case EncoderKind::identity: break;
    case EncoderKind::precomputed:
      if (path.empty()) throw ArgumentError("precomputed encoder needs a path");
      break;
    case EncoderKind::random_projection:
      if (out_dim < 1) throw ArgumentError("random_projection out_dim must be >= 1");
      break;
    case EncoderKind::place_cells:
      if (cells_x < 1 || cells_y < 1) throw ArgumentError("place_cells needs >= 1 cell per axis");
      if (!(sigma > 0.0)) throw ArgumentError("place_cells sigma must be positive");
      if (!(extent_x >= 0.0) || !(extent_y >= 0.0)) {
        throw ArgumentError("place_cells extents must be nonnegative");
      }
      break;
  }
}

EncoderSpec EncoderSpec::precomputed(std::filesystem::path path) {
  EncoderSpec s;
  s.kind = EncoderKind::precomputed;
  s.path = std::move(path);
  return s;
}

EncoderSpec EncoderSpec::random_projection(std::uint64_t seed, int out_dim) {
  EncoderSpec s;
  s.kind = EncoderKind::random_projection;
  s.seed = seed;
  s.out_dim = out_dim;
  return s;
}

EncoderSpec EncoderSpec::place_cells(int cells_x, int cells_y, double extent_x, double extent_y,
                                     double sigma) {
  EncoderSpec s;
  s.kind = EncoderKind::place_cells;
  s.cells_x = cells_x;
  s.cells_y = cells_y;
  s.extent_x = extent_x;
  s.extent_y = extent_y;
  s.sigma = sigma;
  return s;
}

Encoder::Encoder(EncoderSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == EncoderKind::precomputed) sequence_ = load_trajectory(spec_.path);
}

namespace {

void require_nonzero(const Vector& out) {
  if (!(out.squaredNorm() > 0.0)) {
    throw ValidationError("encoder produced a zero feature vector; cosine cost would be undefined");
  }
}

double lattice_center(int k, int cells, double extent) {
  return cells == 1 ? 0.0 : extent * static_cast<double>(k) / static_cast<double>(cells - 1);
}

}  // namespace

Vector Encoder::project(std::span<const double> raw) {
  const auto in_dim = static_cast<Index>(raw.size());
  if (projection_.size() == 0) {
    // Entries uniform in [-1, 1) from the raw 64-bit engine output, which is
    // fully specified by the standard.
    std::mt19937_64 rng(spec_.seed);
    projection_.resize(spec_.out_dim, in_dim);
    for (Index r = 0; r < projection_.rows(); ++r) {
      for (Index c = 0; c < projection_.cols(); ++c) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        projection_(r, c) = 2.0 * unit - 1.0;
      }
    }
  } else if (projection_.cols() != in_dim) {
    throw ArgumentError("random_projection built for input dimension " +
                        std::to_string(projection_.cols()) + ", got " + std::to_string(in_dim));
  }
  Vector out(projection_.rows());
  for (Index r = 0; r < projection_.rows(); ++r) {
    double s = 0.0;
    for (Index c = 0; c < in_dim; ++c) s += projection_(r, c) * raw[static_cast<std::size_t>(c)];
    out(r) = s;
  }
  return out;
}

Vector Encoder::encode(std::span<const double> raw) {
  if (raw.empty()) throw ArgumentError("raw observation is empty");
  for (double x : raw) {
    if (!std::isfinite(x)) throw ValidationError("raw observation has non-finite entries");
  }

  Vector out;
  switch (spec_.kind) {
    case EncoderKind::identity:
      out = Eigen::Map<const Vector>(raw.data(), static_cast<Index>(raw.size()));
      break;
    case EncoderKind::precomputed:
      if (cursor_ >= sequence_->length()) {
        throw ArgumentError("precomputed embedding sequence exhausted after " +
                            std::to_string(sequence_->length()) + " vectors");
      }
      out = sequence_->features().row(cursor_).transpose();
      ++cursor_;
      break;
    case EncoderKind::random_projection:
      out = project(raw);
      break;
    case EncoderKind::place_cells: {
      if (raw.size() < 2) throw ArgumentError("place_cells needs at least two coordinates");
      out.resize(static_cast<Index>(spec_.cells_x) * spec_.cells_y);
      const double denom = 2.0 * spec_.sigma * spec_.sigma;
      Index k = 0;
      for (int cy = 0; cy < spec_.cells_y; ++cy) {
        const double dy = raw[1] - lattice_center(cy, spec_.cells_y, spec_.extent_y);
        for (int cx = 0; cx < spec_.cells_x; ++cx) {
          const double dx = raw[0] - lattice_center(cx, spec_.cells_x, spec_.extent_x);
          out(k++) = std::exp(-(dx * dx + dy * dy) / denom);
        }
      }
      break;
    }
  }
  require_nonzero(out);
  return out;
}

Trajectory Encoder::encode_trajectory(const Trajectory& raw) {
  Matrix features;
  for (Index i = 0; i < raw.length(); ++i) {
    Vector f = encode(raw.frame(i));
    if (i == 0) features.resize(raw.length(), f.size());
    features.row(i) = f.transpose();
  }
  return Trajectory(std::move(features), raw.actions(), raw.meta());
}

}  // namespace temporalot
