#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "temporalot/linalg.hpp"
#include "temporalot/trajectory.hpp"

namespace temporalot {

enum class EncoderKind { identity, precomputed, random_projection, place_cells };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::identity;

  // precomputed
  std::filesystem::path path;

  // random_projection
  std::uint64_t seed = 0;
  int out_dim = 8;

  // place_cells: Gaussian bumps on a lattice over the first two observation
  // coordinates. Lattice spans [0, extent_x] x [0, extent_y] with
  // cells_x * cells_y centers.
  int cells_x = 7;
  int cells_y = 7;
  double extent_x = 6.0;
  double extent_y = 6.0;
  double sigma = 1.0;

  void validate() const;

  static EncoderSpec identity() { return {}; }
  static EncoderSpec precomputed(std::filesystem::path path);
  static EncoderSpec random_projection(std::uint64_t seed, int out_dim);
  static EncoderSpec place_cells(int cells_x, int cells_y, double extent_x, double extent_y,
                                 double sigma);
};

// Maps raw observations to feature vectors. Identity, random projection and
// place cells are pure; precomputed replays a loaded sequence and keeps a
// cursor, so an Encoder of that kind is single-consumer.
class Encoder {
 public:
  explicit Encoder(EncoderSpec spec);

  Vector encode(std::span<const double> raw);

  // Encodes every frame in order; actions and metadata are carried over.
  Trajectory encode_trajectory(const Trajectory& raw);

  const EncoderSpec& spec() const { return spec_; }
  Index position() const { return cursor_; }

 private:
  Vector project(std::span<const double> raw);

  EncoderSpec spec_;
  std::optional<Trajectory> sequence_;
  Index cursor_ = 0;
  Matrix projection_;  // out_dim x in_dim, built on first use
};

}  // namespace temporalot
