#include "forcesim/policy.hpp"

#include "forcesim/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace forcesim {

Observation make_observation(const Pose& pose, double gripper, std::size_t time) {
  return Observation{encode_reference(pose, gripper), time};
}

void NoiseSpec::validate() const {
  if (!(pos_std >= 0.0) || !(rot_std >= 0.0) || !(normal_cone_std >= 0.0)) {
    throw std::invalid_argument("noise standard deviations must be >= 0");
  }
  if (!(contact_flip_prob >= 0.0 && contact_flip_prob <= 1.0)) {
    throw std::invalid_argument("contact_flip_prob must lie in [0, 1]");
  }
}

namespace {

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(helper).normalized();
}

}  // namespace

ActionChunk predict(const Observation& obs, std::span<const SupervisionTuple> demo, const NoiseSpec& noise,
                    std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("chunk horizon must be >= 1");
  if (obs.time >= demo.size()) throw EndOfDemo("observation time is past the end of the demonstration");
  noise.validate();

  ActionChunk chunk;
  chunk.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) chunk.push_back(demo[std::min(obs.time + k, demo.size() - 1)]);
  if (noise.zero()) return chunk;

  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(obs.time), static_cast<std::uint32_t>(obs.time >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const Vec3 offset(noise.pos_std * gauss(rng), noise.pos_std * gauss(rng), noise.pos_std * gauss(rng));
  const Rotation twist =
      Rotation::exp(Vec3(noise.rot_std * gauss(rng), noise.rot_std * gauss(rng), noise.rot_std * gauss(rng)));
  const double cone = noise.normal_cone_std * gauss(rng);
  const double azimuth = 2.0 * std::numbers::pi * uniform(rng);

  for (auto& tuple : chunk) {
    const Pose p = tuple.pose();
    const double grip = tuple.gripper();
    tuple.reference = encode_reference(Pose{p.position + offset, twist * p.orientation}, grip);
    if (tuple.contact && tuple.normal.squaredNorm() > 0.0 && cone != 0.0) {
      const Vec3 n = tuple.normal;
      const Vec3 e1 = any_perpendicular(n);
      const Vec3 axis = std::cos(azimuth) * e1 + std::sin(azimuth) * n.cross(e1);
      tuple.normal = Rotation::from_axis_angle(UnitVec3::normalized(axis), cone).rotate(n).normalized();
    }
    if (noise.contact_flip_prob > 0.0 && uniform(rng) < noise.contact_flip_prob) tuple.contact = 1 - tuple.contact;
  }
  return chunk;
}

double loss(std::span<const SupervisionTuple> pred, std::span<const SupervisionTuple> gt, const LossWeights& w) {
  if (pred.size() != gt.size()) throw LengthMismatch("prediction and ground truth differ in length");
  if (gt.empty()) return 0.0;
  double pose = 0.0, normal = 0.0, contact = 0.0;
  std::size_t in_contact = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    for (std::size_t i = 0; i < 10; ++i) pose += std::abs(pred[t].reference[i] - gt[t].reference[i]);
    if (gt[t].contact == 1) {
      normal += (pred[t].normal - gt[t].normal).cwiseAbs().sum();
      ++in_contact;
    }
    contact += std::abs(pred[t].contact - gt[t].contact);
  }
  const double n = static_cast<double>(gt.size());
  const double l_pose = pose / (10.0 * n);
  const double l_normal = in_contact ? normal / (3.0 * static_cast<double>(in_contact)) : 0.0;
  const double l_contact = contact / n;
  return w.pose * l_pose + w.normal * l_normal + w.contact * l_contact;
}

ChunkedReplay::ChunkedReplay(std::vector<SupervisionTuple> demo, NoiseSpec noise, std::size_t horizon)
    : demo_(std::move(demo)), noise_(noise), horizon_(horizon) {
  if (horizon_ < 1) throw std::invalid_argument("chunk horizon must be >= 1");
  noise_.validate();
}

const SupervisionTuple& ChunkedReplay::step(const Observation& obs) {
  if (cursor_ < chunk_.size()) return chunk_[cursor_++];
  if (obs.time >= demo_.size()) {
    if (!chunk_.empty()) hold_ = chunk_.back();
    else if (!demo_.empty()) hold_ = demo_.back();
    chunk_.clear();
    cursor_ = 0;
    return hold_;
  }
  chunk_ = predict(obs, demo_, noise_, horizon_);
  ++queries_;
  cursor_ = 1;
  return chunk_[0];
}

}  // namespace forcesim
