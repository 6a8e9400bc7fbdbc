#include "regrasp/config.hpp"

#include <fstream>
#include <sstream>

#include "regrasp/errors.hpp"

namespace regrasp {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& where) {
  try {
    std::size_t pos = 0;
    double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    raise(ErrorCode::InvalidConfig, "bad number '" + value + "' for " + where);
  }
}

Vec3 parse_vec3(const std::string& value, const std::string& where) {
  std::stringstream ss(value);
  std::string part;
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) {
      raise(ErrorCode::InvalidConfig, "expected x,y,z triple for " + where);
    }
    v[i] = parse_double(trim(part), where);
  }
  if (std::getline(ss, part, ',')) {
    raise(ErrorCode::InvalidConfig, "too many components for " + where);
  }
  return v;
}

}  // namespace

SystemConfig zero_noise(SystemConfig config) {
  config.noise.systematic_sigma = 0.0;
  config.noise.jitter_sigma = 0.0;
  config.noise.rot_jitter_sigma_deg = 0.0;
  config.noise.dropout_rate = 0.0;
  config.noise.blob_rate = 0.0;
  config.noise.label_flip_rate = 0.0;
  return config;
}

SystemConfig load_config(const std::string& path, SystemConfig base) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open profile " + path);

  SystemConfig cfg = base;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[' && text.back() == ']') {
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::InvalidConfig,
            path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    const std::string where = section + "." + key;

    auto d = [&] { return parse_double(value, where); };
    auto v3 = [&] { return parse_vec3(value, where); };
    auto i = [&] { return static_cast<int>(parse_double(value, where)); };

    bool known = true;
    if (section == "stereo") {
      if (key == "fx") cfg.stereo.fx = d();
      else if (key == "fy") cfg.stereo.fy = d();
      else if (key == "cx") cfg.stereo.cx = d();
      else if (key == "cy") cfg.stereo.cy = d();
      else if (key == "width") cfg.stereo.width = i();
      else if (key == "height") cfg.stereo.height = i();
      else if (key == "baseline") cfg.stereo.baseline = d();
      else if (key == "position") cfg.stereo.position = v3();
      else if (key == "look_at") cfg.stereo.look_at = v3();
      else known = false;
    } else if (section == "overhead") {
      if (key == "fx") cfg.overhead.fx = d();
      else if (key == "fy") cfg.overhead.fy = d();
      else if (key == "cx") cfg.overhead.cx = d();
      else if (key == "cy") cfg.overhead.cy = d();
      else if (key == "width") cfg.overhead.width = i();
      else if (key == "height") cfg.overhead.height = i();
      else if (key == "position") cfg.overhead.position = v3();
      else if (key == "look_at") cfg.overhead.look_at = v3();
      else known = false;
    } else if (section == "arms") {
      if (key == "left_rcm") cfg.arms.left_rcm = v3();
      else if (key == "right_rcm") cfg.arms.right_rcm = v3();
      else if (key == "workspace_center") cfg.arms.workspace_center = v3();
      else if (key == "workspace_half_extents") cfg.arms.workspace_half_extents = v3();
      else if (key == "home_offset") cfg.arms.home_offset = v3();
      else if (key == "tip_anchor_offset") cfg.arms.tip_anchor_offset = d();
      else known = false;
    } else if (section == "noise") {
      if (key == "systematic_sigma") cfg.noise.systematic_sigma = d();
      else if (key == "jitter_sigma") cfg.noise.jitter_sigma = d();
      else if (key == "rot_jitter_sigma_deg") cfg.noise.rot_jitter_sigma_deg = d();
      else if (key == "dropout_rate") cfg.noise.dropout_rate = d();
      else if (key == "blob_rate") cfg.noise.blob_rate = d();
      else if (key == "label_flip_rate") cfg.noise.label_flip_rate = d();
      else known = false;
    } else if (section == "needle") {
      if (key == "arc_extent_deg") cfg.needle.arc_extent_deg = d();
      else if (key == "occlusion_radius") cfg.needle.occlusion_radius = d();
      else if (key == "sample_spacing") cfg.needle.sample_spacing = d();
      else if (key == "half_thickness_px") cfg.needle.half_thickness_px = d();
      else known = false;
    } else if (section == "servo") {
      if (key == "max_iterations") cfg.servo.max_iterations = i();
      else if (key == "tolerance") cfg.servo.tolerance = d();
      else if (key == "step_cap") cfg.servo.step_cap = d();
      else if (key == "translation_scale") cfg.servo.translation_scale = d();
      else if (key == "rotation_increment_deg") cfg.servo.rotation_increment_deg = d();
      else if (key == "max_exploratory_rotations") cfg.servo.max_exploratory_rotations = i();
      else if (key == "align_max_angle_deg") cfg.servo.align_max_angle_deg = d();
      else known = false;
    } else if (section == "ransac") {
      if (key == "inlier_radius") cfg.ransac.inlier_radius = d();
      else if (key == "iterations") cfg.ransac.iterations = i();
      else if (key == "min_inliers") cfg.ransac.min_inliers = i();
      else known = false;
    } else if (section == "grasp") {
      if (key == "beta_decay") cfg.grasp.beta_decay = d();
      else if (key == "stop_threshold") cfg.grasp.stop_threshold = d();
      else if (key == "initial_step") cfg.grasp.initial_step = d();
      else if (key == "descent") cfg.grasp.descent = d();
      else if (key == "max_steps") cfg.grasp.max_steps = i();
      else if (key == "capture_half_widths") cfg.grasp.capture_half_widths = v3();
      else if (key == "in_hand_rot_sigma_deg") cfg.grasp.in_hand_rot_sigma_deg = d();
      else known = false;
    } else if (section == "sim") {
      if (key == "tau_max") cfg.sim.tau_max = static_cast<long>(parse_double(value, where));
      else if (key == "step_latency") cfg.sim.step_latency = d();
      else known = false;
    } else {
      raise(ErrorCode::InvalidConfig, path + ": unknown section [" + section + "]");
    }
    if (!known) {
      raise(ErrorCode::InvalidConfig, path + ": unknown key " + where);
    }
  }
  return cfg;
}

void save_config(const std::string& path, const SystemConfig& c) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  auto v3 = [](const Vec3& v) {
    std::ostringstream ss;
    ss << v.x() << "," << v.y() << "," << v.z();
    return ss.str();
  };
  out << "[stereo]\n"
      << "fx=" << c.stereo.fx << "\nfy=" << c.stereo.fy << "\ncx=" << c.stereo.cx
      << "\ncy=" << c.stereo.cy << "\nwidth=" << c.stereo.width << "\nheight=" << c.stereo.height
      << "\nbaseline=" << c.stereo.baseline << "\nposition=" << v3(c.stereo.position)
      << "\nlook_at=" << v3(c.stereo.look_at) << "\n\n";
  out << "[overhead]\n"
      << "fx=" << c.overhead.fx << "\nfy=" << c.overhead.fy << "\ncx=" << c.overhead.cx
      << "\ncy=" << c.overhead.cy << "\nwidth=" << c.overhead.width
      << "\nheight=" << c.overhead.height << "\nposition=" << v3(c.overhead.position)
      << "\nlook_at=" << v3(c.overhead.look_at) << "\n\n";
  out << "[arms]\n"
      << "left_rcm=" << v3(c.arms.left_rcm) << "\nright_rcm=" << v3(c.arms.right_rcm)
      << "\nworkspace_center=" << v3(c.arms.workspace_center)
      << "\nworkspace_half_extents=" << v3(c.arms.workspace_half_extents)
      << "\nhome_offset=" << v3(c.arms.home_offset)
      << "\ntip_anchor_offset=" << c.arms.tip_anchor_offset << "\n\n";
  out << "[noise]\n"
      << "systematic_sigma=" << c.noise.systematic_sigma
      << "\njitter_sigma=" << c.noise.jitter_sigma
      << "\nrot_jitter_sigma_deg=" << c.noise.rot_jitter_sigma_deg
      << "\ndropout_rate=" << c.noise.dropout_rate << "\nblob_rate=" << c.noise.blob_rate
      << "\nlabel_flip_rate=" << c.noise.label_flip_rate << "\n\n";
  out << "[needle]\n"
      << "arc_extent_deg=" << c.needle.arc_extent_deg
      << "\nocclusion_radius=" << c.needle.occlusion_radius
      << "\nsample_spacing=" << c.needle.sample_spacing
      << "\nhalf_thickness_px=" << c.needle.half_thickness_px << "\n\n";
  out << "[servo]\n"
      << "max_iterations=" << c.servo.max_iterations << "\ntolerance=" << c.servo.tolerance
      << "\nstep_cap=" << c.servo.step_cap
      << "\ntranslation_scale=" << c.servo.translation_scale
      << "\nrotation_increment_deg=" << c.servo.rotation_increment_deg
      << "\nmax_exploratory_rotations=" << c.servo.max_exploratory_rotations
      << "\nalign_max_angle_deg=" << c.servo.align_max_angle_deg << "\n\n";
  out << "[ransac]\n"
      << "inlier_radius=" << c.ransac.inlier_radius << "\niterations=" << c.ransac.iterations
      << "\nmin_inliers=" << c.ransac.min_inliers << "\n\n";
  out << "[grasp]\n"
      << "beta_decay=" << c.grasp.beta_decay << "\nstop_threshold=" << c.grasp.stop_threshold
      << "\ninitial_step=" << c.grasp.initial_step << "\ndescent=" << c.grasp.descent
      << "\nmax_steps=" << c.grasp.max_steps
      << "\ncapture_half_widths=" << v3(c.grasp.capture_half_widths)
      << "\nin_hand_rot_sigma_deg=" << c.grasp.in_hand_rot_sigma_deg << "\n\n";
  out << "[sim]\n"
      << "tau_max=" << c.sim.tau_max << "\nstep_latency=" << c.sim.step_latency << "\n";
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace regrasp
