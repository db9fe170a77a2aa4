#pragma once

// Scripted stand-in for a learned chunking policy: replays expert supervision
// with seeded perturbations, plus the training loss as a metric.

#include "forcesim/expert.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace forcesim {

struct Observation {
  std::array<double, 10> proprioception{};  // position, 6D rotation, gripper
  std::size_t time = 0;                     // policy step index
};

Observation make_observation(const Pose& pose, double gripper, std::size_t time);

using ActionChunk = std::vector<SupervisionTuple>;

struct NoiseSpec {
  double pos_std = 0.0;          // m, per axis
  double rot_std = 0.0;          // rad, per axis of the rotation vector
  double normal_cone_std = 0.0;  // rad
  double contact_flip_prob = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument.
  void validate() const;
  bool zero() const { return pos_std == 0.0 && rot_std == 0.0 && normal_cone_std == 0.0 && contact_flip_prob == 0.0; }
};

inline constexpr std::size_t kDefaultHorizon = 16;

/// Next `horizon` tuples from demo[obs.time], padded with the last tuple.
/// One position offset, one rotation perturbation and one normal tilt are
/// drawn per chunk; contact flags flip independently per tuple. The draw
/// depends only on (noise.seed, obs.time). Throws EndOfDemo when obs.time is
/// past the end of the demo.
ActionChunk predict(const Observation& obs, std::span<const SupervisionTuple> demo, const NoiseSpec& noise,
                    std::size_t horizon = kDefaultHorizon);

struct LossWeights {
  double pose = 1.0;
  double normal = 1.0;
  double contact = 1.0;
};

/// pose: mean |.| over the 10-d references; normal: mean |.| over steps with
/// ground-truth contact (0 when there are none); contact: mean |.| of flags.
/// Throws LengthMismatch.
double loss(std::span<const SupervisionTuple> pred, std::span<const SupervisionTuple> gt,
            const LossWeights& w = {});

/// Executes a demo one policy step at a time, querying a new chunk whenever
/// the previous one is used up.
class ChunkedReplay {
 public:
  ChunkedReplay(std::vector<SupervisionTuple> demo, NoiseSpec noise, std::size_t horizon = kDefaultHorizon);

  /// Action for policy step `obs.time`; past the end of the demo the last
  /// action is held.
  const SupervisionTuple& step(const Observation& obs);

  std::size_t queries() const { return queries_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t demo_length() const { return demo_.size(); }

 private:
  std::vector<SupervisionTuple> demo_;
  NoiseSpec noise_;
  std::size_t horizon_;
  ActionChunk chunk_;
  std::size_t cursor_ = 0;
  std::size_t queries_ = 0;
  SupervisionTuple hold_;
};

}  // namespace forcesim
