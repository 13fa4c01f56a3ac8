// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#include "tdeed/data/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/rng.hpp"

namespace tdeed::data {
namespace {

struct Sprite {
  double cx = 0, cy = 0;   // center, in pixels
  double side = 6.0;
  float color[3] = {0, 0, 0};
  double alpha = 1.0;
};

// Coverage of the pixel cell [px,px+1)x[py,py+1) by an axis-aligned square.
double coverage(double px, double py, double left, double top, double side) {
  const double ox = std::max(0.0, std::min(px + 1.0, left + side) - std::max(px, left));
  const double oy = std::max(0.0, std::min(py + 1.0, top + side) - std::max(py, top));
  return ox * oy;
}

// Draws with toroidal wrap by repeating the square at +-W / +-H offsets.
void draw_sprite(MatX<float>& frame, int h, int w, const Sprite& s) {
  const double left0 = s.cx - s.side / 2.0;
  const double top0 = s.cy - s.side / 2.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double left = left0 + dx * w;
      const double top = top0 + dy * h;
      const int x_lo = std::max(0, static_cast<int>(std::floor(left)));
      const int x_hi = std::min(w - 1, static_cast<int>(std::ceil(left + s.side)));
      const int y_lo = std::max(0, static_cast<int>(std::floor(top)));
      const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(top + s.side)));
      for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
          const double cov = coverage(x, y, left, top, s.side) * s.alpha;
          if (cov <= 0.0) continue;
          const int p = y * w + x;
          for (int ch = 0; ch < 3; ++ch)
            frame(ch, p) = static_cast<float>((1.0 - cov) * frame(ch, p) +
                                              cov * s.color[ch]);
        }
      }
    }
  }
}

// Low-contrast static background from a handful of random plane waves.
MatX<float> make_background(int h, int w, Rng& rng) {
  MatX<float> bg(3, h * w);
  double fx[4], fy[4], ph[4];
  for (int i = 0; i < 4; ++i) {
    fx[i] = rng.uniform(0.05, 0.35);
    fy[i] = rng.uniform(0.05, 0.35);
    ph[i] = rng.uniform(0.0, 6.283185307179586);
  }
  const double tint[3] = {rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03),
                          rng.uniform(-0.03, 0.03)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int i = 0; i < 4; ++i)
        v += std::sin(fx[i] * x + fy[i] * y + ph[i]);
      const double base = 0.42 + 0.05 * (v / 4.0);
      const int p = y * w + x;
      for (int ch = 0; ch < 3; ++ch)
        bg(ch, p) = static_cast<float>(std::clamp(base + tint[ch], 0.0, 1.0));
    }
  }
  return bg;
}

double wrap(double v, double extent) {
  v = std::fmod(v, extent);
  return v < 0 ? v + extent : v;
}

// Secondary sprites live this long on each side of their event frame.
constexpr int kSecondaryLife = 10;
constexpr int kSecondaryFade = 4;   // linear alpha ramp at the far end
constexpr int kEventMargin = 12;    // distance from video ends
constexpr int kEventSpacing = 24;   // min distance between events

std::vector<int> place_events(int length, int n, Rng& rng) {
  if (n == 0) return {};
  const int usable = length - 2 * kEventMargin - (n - 1) * kEventSpacing;
  check_config(usable >= 1,
               "sparsity: too many events for video_length at the required spacing");
  std::vector<int> u(n);
  for (int i = 0; i < n; ++i) u[i] = rng.uniform_int(0, usable - 1);
  std::sort(u.begin(), u.end());
  std::vector<int> frames(n);
  for (int i = 0; i < n; ++i) frames[i] = kEventMargin + u[i] + i * kEventSpacing;
  return frames;
}

}  // namespace

FeatureMapSeq<float> SyntheticVideo::clip(int start, int len) const {
  check_range(start >= 0 && start + len <= ann.length, "clip: window out of range");
  FeatureMapSeq<float> out = FeatureMapSeq<float>::zeros(3, h, w, len);
  const std::size_t frame_bytes = static_cast<std::size_t>(3) * h * w;
  for (int t = 0; t < len; ++t) {
    const std::uint8_t* src = frames.data() + (start + t) * frame_bytes;
    float* dst = out.m.data() + static_cast<std::size_t>(t) * frame_bytes;
    for (std::size_t i = 0; i < frame_bytes; ++i)
      dst[i] = static_cast<float>(src[i]) * (1.0f / 255.0f);
  }
  return out;
}

std::vector<SyntheticVideo> generate_dataset(const GeneratorSpec& spec) {
  check_config(spec.C >= 2, "C: need at least 2 event classes");
  check_config(spec.C <= 4, "C: the renderer defines 4 event behaviours");
  check_config(spec.video_length >= 4 * spec.clip_length,
               "video_length: must be at least 4x clip_length");
  check_config(spec.sparsity > 0.0 && spec.sparsity <= 0.05,
               "sparsity: must lie in (0, 0.05]");
  check_config(spec.num_videos >= 1, "num_videos: must be positive");
  check_config(spec.height >= 16 && spec.width >= 16,
               "height/width: renderer needs at least 16x16 frames");

  const float palette[2][3] = {{0.92f, 0.25f, 0.20f}, {0.20f, 0.45f, 0.92f}};
  std::vector<SyntheticVideo> out;
  out.reserve(spec.num_videos);

  for (int vi = 0; vi < spec.num_videos; ++vi) {
    Rng rng = Rng::derive(spec.seed, 0xda7a, static_cast<std::uint64_t>(vi));
    SyntheticVideo v;
    v.h = spec.height;
    v.w = spec.width;
    v.ann.video_id = spec.id_prefix + "_" + std::to_string(vi);
    v.ann.length = spec.video_length;
    v.ann.fps = spec.fps;

    const int n_events =
        static_cast<int>(std::floor(spec.video_length * spec.sparsity));
    const std::vector<int> frames_at = place_events(spec.video_length, n_events, rng);
    for (int f : frames_at)
      v.ann.events.push_back({f, rng.uniform_int(1, spec.C)});

    // Pass 1: primary sprite trajectory and palette, reversals applied.
    const double side = std::max(5.0, std::min(spec.height, spec.width) / 5.0);
    double cx = rng.uniform(0.0, spec.width);
    double cy = rng.uniform(0.0, spec.height);
    const double speed = rng.uniform(0.7, 1.3);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    double vx = speed * std::cos(angle), vy = speed * std::sin(angle);
    std::vector<double> pxs(spec.video_length), pys(spec.video_length);
    std::vector<double> vxs(spec.video_length), vys(spec.video_length);
    std::vector<int> pal(spec.video_length);
    int palette_now = 0;
    std::size_t next_event = 0;
    for (int t = 0; t < spec.video_length; ++t) {
      while (next_event < v.ann.events.size() &&
             v.ann.events[next_event].frame == t) {
        const auto kind = static_cast<EventKind>(v.ann.events[next_event].class_id);
        if (kind == EventKind::color_flip) palette_now ^= 1;
        if (kind == EventKind::reverse) {
          vx = -vx;
          vy = -vy;
        }
        ++next_event;
      }
      pxs[t] = cx;
      pys[t] = cy;
      vxs[t] = vx;
      vys[t] = vy;
      pal[t] = palette_now;
      cx = wrap(cx + vx, spec.width);
      cy = wrap(cy + vy, spec.height);
    }

    // Pass 2: secondary sprite intervals for split/merge events. The two
    // are exact time-mirrors of each other around the event frame, so only
    // the temporal order of the frames distinguishes them.
    struct Secondary {
      int t0 = 0, t1 = 0;  // inclusive frame range
      int event_frame = 0;
      double rvx = 0, rvy = 0;  // drift relative to the primary
      bool fades_at_end = false;
    };
    std::vector<Secondary> secondaries;
    for (const auto& e : v.ann.events) {
      const auto kind = static_cast<EventKind>(e.class_id);
      const double rel_angle = rng.uniform(0.0, 6.283185307179586);
      const double rel_speed = rng.uniform(0.8, 1.2);
      if (kind == EventKind::split) {
        Secondary s;
        s.t0 = e.frame;
        s.t1 = std::min(spec.video_length - 1, e.frame + kSecondaryLife);
        s.event_frame = e.frame;
        s.rvx = rel_speed * std::cos(rel_angle);
        s.rvy = rel_speed * std::sin(rel_angle);
        s.fades_at_end = true;
        secondaries.push_back(s);
      } else if (kind == EventKind::merge) {
        Secondary s;
        s.t0 = std::max(0, e.frame - kSecondaryLife);
        s.t1 = e.frame;
        s.event_frame = e.frame;
        s.rvx = rel_speed * std::cos(rel_angle);
        s.rvy = rel_speed * std::sin(rel_angle);
        s.fades_at_end = false;  // fades at the start instead
        secondaries.push_back(s);
      }
    }

    // Pass 3: render.
    MatX<float> bg = make_background(spec.height, spec.width, rng);
    v.frames.resize(static_cast<std::size_t>(spec.video_length) * 3 *
                    spec.height * spec.width);
    MatX<float> frame(3, spec.height * spec.width);
    for (int t = 0; t < spec.video_length; ++t) {
      frame = bg;
      Sprite primary;
      primary.cx = pxs[t];
      primary.cy = pys[t];
      primary.side = side;
      for (int ch = 0; ch < 3; ++ch) primary.color[ch] = palette[pal[t]][ch];
      draw_sprite(frame, spec.height, spec.width, primary);

      for (const auto& s : secondaries) {
        if (t < s.t0 || t > s.t1) continue;
        const int dt = t - s.event_frame;  // <=0 for merge, >=0 for split
        Sprite sec;
        sec.cx = wrap(pxs[t] + dt * s.rvx, spec.width);
        sec.cy = wrap(pys[t] + dt * s.rvy, spec.height);
        sec.side = side * 0.75;
        for (int ch = 0; ch < 3; ++ch) sec.color[ch] = palette[pal[t]][ch];
        const int dist_from_far_end =
            s.fades_at_end ? s.t1 - t : t - s.t0;
        sec.alpha = dist_from_far_end >= kSecondaryFade
                        ? 1.0
                        : (dist_from_far_end + 1.0) / (kSecondaryFade + 1.0);
        draw_sprite(frame, spec.height, spec.width, sec);
      }

      std::uint8_t* dst = v.frames.data() +
                          static_cast<std::size_t>(t) * 3 * spec.height * spec.width;
      const float* src = frame.data();
      const std::size_t n = static_cast<std::size_t>(3) * spec.height * spec.width;
      for (std::size_t i = 0; i < n; ++i)
        dst[i] = static_cast<std::uint8_t>(
            std::lround(std::clamp(src[i], 0.0f, 1.0f) * 255.0f));
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace tdeed::data
