#include "regrasp/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "regrasp/rng.hpp"

namespace regrasp {
namespace {

Vec3 axis_unit(GraspAxis axis) {
  return axis == GraspAxis::X ? Vec3::UnitX() : Vec3::UnitY();
}

int sign_or_plus(double v) { return v < 0.0 ? -1 : 1; }

}  // namespace

CropObs crop_egocentric(const SegMask& image, const RigidTransform& gripper_pose,
                        const CameraModel& camera, const CropSpec& spec) {
  Vec2 px;
  try {
    px = project(camera, gripper_pose.translation);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonPositiveDepth) {
      raise(ErrorCode::GripperOffscreen, "gripper behind the camera");
    }
    throw;
  }
  int col = static_cast<int>(std::lround(px.x()));
  int row = static_cast<int>(std::lround(px.y()));
  if (col < 0 || col >= image.width || row < 0 || row >= image.height) {
    raise(ErrorCode::GripperOffscreen, "gripper projects outside the image");
  }

  int r0 = std::clamp(row - spec.height / 2, 0, std::max(0, image.height - spec.height));
  int c0 = std::clamp(col - spec.width / 2, 0, std::max(0, image.width - spec.width));

  CropObs crop;
  crop.height = spec.height;
  crop.width = spec.width;
  crop.data.resize(static_cast<std::size_t>(spec.height) * spec.width, 0.0f);
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      int ir = r0 + r;
      int ic = c0 + c;
      if (ir < image.height && ic < image.width) {
        crop.data[static_cast<std::size_t>(r) * spec.width + c] = image.at(ir, ic) ? 1.0f : 0.0f;
      }
    }
  }
  return crop;
}

Vec3 true_grasp_target(const SimWorld& world) {
  const Vec3 holder_pos = tip_anchor(world, world.holder(), /*commanded=*/false);
  const double spacing = 0.0005;
  double arc_len = world.needle.circle.radius * world.needle.arc_extent;
  int n = std::max(2, static_cast<int>(std::ceil(arc_len / spacing)) + 1);
  Vec3 best = world.needle.tip;
  double best_dist = -1.0;
  for (int i = 0; i < n; ++i) {
    Vec3 p = arc_point(world.needle, world.needle.arc_extent * i / (n - 1));
    double dist = (p - holder_pos).norm();
    if (dist > best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

AxisPolicy oracle_policy(GraspAxis axis, const SimWorld& /*world*/, double flip_rate,
                         std::uint64_t seed) {
  auto rng = std::make_shared<CounterRng>(seed);
  AxisPolicy policy;
  policy.axis = axis;
  policy.decide = [axis, flip_rate, rng](SimWorld& w) {
    ArmId grasping = other_arm(w.holder());
    double target = true_grasp_target(w)[axis == GraspAxis::X ? 0 : 1];
    double gripper = w.gripper(grasping).actual_pose.translation[axis == GraspAxis::X ? 0 : 1];
    int dir = sign_or_plus(target - gripper);
    if (flip_rate > 0.0 && rng->bernoulli(flip_rate)) dir = -dir;
    return dir;
  };
  return policy;
}

ServoAxisResult servo_axis(SimWorld& world, ArmId arm, const AxisPolicy& policy,
                           const GraspParams& params) {
  ServoAxisResult result;
  result.final_step = params.initial_step;
  const Vec3 unit = axis_unit(policy.axis);

  double step = params.initial_step;
  int prev_dir = 0;
  for (int moves = 0; moves < params.max_steps; ++moves) {
    int dir = policy.decide(world);
    if (prev_dir != 0 && dir != prev_dir) {
      step *= params.beta_decay;
      ++result.flips;
    }
    if (step < params.stop_threshold) {
      result.final_step = step;
      return result;
    }
    const RigidTransform& current = world.gripper(arm).commanded_pose;
    RigidTransform next = current;
    next.translation += dir * step * unit;
    command_arm(world, arm, next, world.gripper(arm).jaw);
    result.net_displacement += dir * step;
    result.travel += step;
    ++result.steps;
    prev_dir = dir;
  }
  // One more decay chance after the final move.
  int dir = policy.decide(world);
  if (prev_dir != 0 && dir != prev_dir) {
    step *= params.beta_decay;
    ++result.flips;
  }
  if (step < params.stop_threshold) {
    result.final_step = step;
    return result;
  }
  raise(ErrorCode::MaxStepsExceeded, std::string("axis ") + to_string(policy.axis) +
                                         " servo did not converge within " +
                                         std::to_string(params.max_steps) + " moves");
}

std::vector<double> crop_features(const CropObs& crop) {
  std::vector<double> features(static_cast<std::size_t>(kFeatureRows) * kFeatureCols, 0.0);
  const int cell_h = std::max(1, crop.height / kFeatureRows);
  const int cell_w = std::max(1, crop.width / kFeatureCols);
  for (int fr = 0; fr < kFeatureRows; ++fr) {
    for (int fc = 0; fc < kFeatureCols; ++fc) {
      double sum = 0.0;
      int count = 0;
      for (int r = fr * cell_h; r < std::min((fr + 1) * cell_h, crop.height); ++r) {
        for (int c = fc * cell_w; c < std::min((fc + 1) * cell_w, crop.width); ++c) {
          sum += crop.at(r, c);
          ++count;
        }
      }
      features[static_cast<std::size_t>(fr) * kFeatureCols + fc] = count ? sum / count : 0.0;
    }
  }
  return features;
}

int PolicyEnsemble::decide_features(const std::vector<double>& features) const {
  int votes = 0;
  for (const LinearMember& member : members) {
    double score = member.bias;
    for (std::size_t i = 0; i < features.size() && i < member.weights.size(); ++i) {
      score += member.weights[i] * features[i];
    }
    votes += score < 0.0 ? -1 : 1;
  }
  return votes < 0 ? -1 : 1;
}

int PolicyEnsemble::decide(const CropObs& crop) const { return decide_features(crop_features(crop)); }

PolicyEnsemble train_axis_policy(GraspAxis axis, const std::vector<Demo>& demos,
                                 std::uint64_t seed) {
  std::size_t positives = 0;
  for (const Demo& d : demos) positives += d.label > 0 ? 1 : 0;
  if (demos.empty() || positives == 0 || positives == demos.size()) {
    raise(ErrorCode::DegenerateDemos, "need demonstrations of both directions");
  }

  const std::size_t dim = demos.front().features.size();
  PolicyEnsemble ensemble;
  ensemble.axis = axis;

  for (int m = 0; m < kEnsembleSize; ++m) {
    CounterRng rng = CounterRng(seed).derive(static_cast<std::uint64_t>(m));
    // Bootstrap resample, forced to keep both classes.
    std::vector<const Demo*> sample(demos.size());
    bool has_pos = false, has_neg = false;
    do {
      has_pos = has_neg = false;
      for (auto& slot : sample) {
        slot = &demos[rng.uniform_index(demos.size())];
        (slot->label > 0 ? has_pos : has_neg) = true;
      }
    } while (!has_pos || !has_neg);

    // Pocket perceptron: keep the best weights seen over the epochs.
    LinearMember current{std::vector<double>(dim, 0.0), 0.0};
    LinearMember best = current;
    std::size_t best_errors = sample.size() + 1;
    std::vector<std::size_t> order(sample.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < 60; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
      }
      for (std::size_t i : order) {
        const Demo& d = *sample[i];
        double score = current.bias;
        for (std::size_t k = 0; k < dim; ++k) score += current.weights[k] * d.features[k];
        if (d.label * score <= 0.0) {
          for (std::size_t k = 0; k < dim; ++k) current.weights[k] += d.label * d.features[k];
          current.bias += d.label;
        }
      }
      std::size_t errors = 0;
      for (const Demo* d : sample) {
        double score = current.bias;
        for (std::size_t k = 0; k < dim; ++k) score += current.weights[k] * d->features[k];
        if (d->label * score <= 0.0) ++errors;
      }
      if (errors < best_errors) {
        best_errors = errors;
        best = current;
        if (errors == 0) break;
      }
    }
    ensemble.members.push_back(best);
  }

  std::size_t correct = 0;
  for (const Demo& d : demos) {
    if (ensemble.decide_features(d.features) == d.label) ++correct;
  }
  ensemble.training_accuracy = static_cast<double>(correct) / static_cast<double>(demos.size());
  return ensemble;
}

AxisPolicy policy_from_ensemble(std::shared_ptr<const PolicyEnsemble> ensemble) {
  AxisPolicy policy;
  policy.axis = ensemble->axis;
  CropSpec spec = ensemble->axis == GraspAxis::X ? x_crop_spec() : y_crop_spec();
  policy.decide = [ensemble, spec](SimWorld& w) {
    ArmId grasping = other_arm(w.holder());
    const CameraModel& cam =
        spec.source == CropSpec::Source::Inclined ? w.rig.left : w.overhead;
    SegMask view = render_view(w, spec.source == CropSpec::Source::Inclined ? 0 : 2);
    CropObs crop = crop_egocentric(view, w.gripper(grasping).commanded_pose, cam, spec);
    return ensemble->decide(crop);
  };
  return policy;
}

std::vector<Demo> generate_axis_demos(const SimWorld& world_at_pregrasp, GraspAxis axis,
                                      const std::vector<double>& offsets) {
  const Vec3 unit = axis_unit(axis);
  const Vec3 cross_unit = axis == GraspAxis::X ? Vec3::UnitY() : Vec3::UnitX();
  const CropSpec spec = axis == GraspAxis::X ? x_crop_spec() : y_crop_spec();
  std::vector<Demo> demos;
  for (double offset : offsets) {
    if (offset == 0.0) continue;
    for (double cross : {-0.001, 0.0, 0.001}) {
      SimWorld world = world_at_pregrasp;
      ArmId grasping = other_arm(world.holder());
      Vec3 target = true_grasp_target(world);
      RigidTransform pose = world.gripper(grasping).commanded_pose;
      pose.translation.x() = target.x();
      pose.translation.y() = target.y();
      pose.translation += offset * unit + cross * cross_unit;
      command_arm(world, grasping, pose, world.gripper(grasping).jaw);

      const CameraModel& cam =
          spec.source == CropSpec::Source::Inclined ? world.rig.left : world.overhead;
      SegMask view = render_view(world, spec.source == CropSpec::Source::Inclined ? 0 : 2);
      CropObs crop =
          crop_egocentric(view, world.gripper(grasping).commanded_pose, cam, spec);
      demos.push_back({crop_features(crop), offset > 0.0 ? -1 : 1});
    }
  }
  return demos;
}

void save_demos_csv(const std::string& path, GraspAxis axis, const std::vector<Demo>& demos) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "axis,label,features\n";
  for (const Demo& d : demos) {
    out << to_string(axis) << "," << d.label;
    char buf[32];
    for (double f : d.features) {
      std::snprintf(buf, sizeof(buf), ",%.17g", f);
      out << buf;
    }
    out << "\n";
  }
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

std::vector<Demo> load_demos_csv(const std::string& path, GraspAxis* axis_out) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<Demo> demos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    if (axis_out) *axis_out = field == "y" ? GraspAxis::Y : GraspAxis::X;
    Demo d;
    std::getline(ss, field, ',');
    d.label = std::stoi(field);
    while (std::getline(ss, field, ',')) d.features.push_back(std::stod(field));
    demos.push_back(std::move(d));
  }
  return demos;
}

void save_policy(const std::string& path, const PolicyEnsemble& ensemble) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "axis " << to_string(ensemble.axis) << "\n";
  out << "members " << ensemble.members.size() << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", ensemble.training_accuracy);
  out << "training_accuracy " << buf << "\n";
  for (const LinearMember& m : ensemble.members) {
    std::snprintf(buf, sizeof(buf), "%.17g", m.bias);
    out << "bias " << buf << "\nweights";
    for (double w : m.weights) {
      std::snprintf(buf, sizeof(buf), " %.17g", w);
      out << buf;
    }
    out << "\n";
  }
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

PolicyEnsemble load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  PolicyEnsemble ensemble;
  std::string token;
  std::size_t member_count = 0;
  while (in >> token) {
    if (token == "axis") {
      std::string axis;
      in >> axis;
      ensemble.axis = axis == "y" ? GraspAxis::Y : GraspAxis::X;
    } else if (token == "members") {
      in >> member_count;
    } else if (token == "training_accuracy") {
      in >> ensemble.training_accuracy;
    } else if (token == "bias") {
      LinearMember m;
      in >> m.bias;
      in >> token;  // "weights"
      std::string rest;
      std::getline(in, rest);
      std::stringstream ss(rest);
      double w;
      while (ss >> w) m.weights.push_back(w);
      ensemble.members.push_back(std::move(m));
    } else {
      raise(ErrorCode::IoFailure, "unexpected token '" + token + "' in " + path);
    }
  }
  if (ensemble.members.size() != member_count) {
    raise(ErrorCode::IoFailure, "member count mismatch in " + path);
  }
  return ensemble;
}

GraspOutcome execute_grasp(SimWorld& world, ArmId grasping_arm, const AxisPolicy& x_policy,
                           const AxisPolicy& y_policy, const GraspParams& params,
                           const NeedleStateEstimate& presented) {
  GraspOutcome outcome;

  // Hover above the believed grasp point, jaw open, top-down approach.
  Vec3 hover = presented.tip + Vec3(0.0, 0.0, params.descent);
  RigidTransform approach = RigidTransform::from(
      reachable_rotation(world.arm(grasping_arm), hover, 0.0, 0.0), hover);
  command_arm(world, grasping_arm, approach, 0);

  try {
    outcome.x_servo = servo_axis(world, grasping_arm, x_policy, params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaxStepsExceeded) throw;
    outcome.failure_axis = 'X';
    return outcome;
  }
  try {
    outcome.y_servo = servo_axis(world, grasping_arm, y_policy, params);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MaxStepsExceeded) throw;
    outcome.failure_axis = 'Y';
    return outcome;
  }

  // Descend and close.
  RigidTransform down = world.gripper(grasping_arm).commanded_pose;
  down.translation.z() -= params.descent;
  command_arm(world, grasping_arm, down, 0);
  ArmId releasing = other_arm(grasping_arm);
  command_arm(world, grasping_arm, down, 1);

  GraspAdjudication adj = adjudicate_grasp(world, grasping_arm);
  outcome.residual = adj.residual;
  if (adj.success) {
    // The releasing gripper opens only after the grasping jaw has closed.
    command_arm(world, releasing, world.gripper(releasing).commanded_pose, 0);
    outcome.success = true;
    return outcome;
  }
  outcome.failure_axis =
      adj.residual.x() > world.config.grasp.capture_half_widths.x() ? 'X' : 'Y';
  return outcome;
}

}  // namespace regrasp
