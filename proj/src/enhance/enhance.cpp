#include "fpe/enhance.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fpe/parallel.hpp"

namespace fpe {
namespace {

// Input replicated `pad` pixels beyond every edge.
struct Padded {
  int pad = 0;
  int stride = 0;
  std::vector<double> data;

  const double* at(int x, int y) const {
    return data.data() + static_cast<std::size_t>(y + pad) * stride + (x + pad);
  }
};

Padded pad_replicate(const RealMap& input, int pad) {
  Padded p;
  p.pad = pad;
  p.stride = input.width() + 2 * pad;
  const int rows = input.height() + 2 * pad;
  p.data.resize(static_cast<std::size_t>(p.stride) * rows);
  for (int y = 0; y < rows; ++y) {
    const int sy = std::clamp(y - pad, 0, input.height() - 1);
    const auto src = input.row(sy);
    double* dst = p.data.data() + static_cast<std::size_t>(y) * p.stride;
    for (int x = 0; x < p.stride; ++x) dst[x] = src[std::clamp(x - pad, 0, input.width() - 1)];
  }
  return p;
}

double correlate_direct(const Padded& p, const GaborKernel& k, int x, int y) {
  const int r = k.radius();
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    const double* src = p.at(x - r, y + dy);
    const double* w = k.weights.data() + static_cast<std::size_t>(dy + r) * k.size;
    double row = 0.0;
    for (int i = 0; i < k.size; ++i) row += w[i] * src[i];
    sum += row;
  }
  return sum;
}

struct Pixel {
  int x, y;
};

// Scratch buffers reused across bank entries by one worker.
struct SeparableScratch {
  std::vector<int> diff;
  std::vector<std::uint8_t> needed;
  std::vector<double> rc, rs, rm;
};

// Filters the pixels assigned to one bank entry. Uses the rank-3 separable
// form of the standardized kernel over the rows those pixels need, unless
// direct correlation is cheaper for this pixel set.
void filter_group(const Padded& p, const GaborKernel& k, const std::vector<Pixel>& pixels,
                  RealMap& out, SeparableScratch& scratch) {
  const int r = k.radius();
  const int s = k.size;
  int x0 = pixels.front().x, x1 = x0, y0 = pixels.front().y, y1 = y0;
  for (const auto& px : pixels) {
    x0 = std::min(x0, px.x);
    x1 = std::max(x1, px.x);
    y0 = std::min(y0, px.y);
    y1 = std::max(y1, px.y);
  }
  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1 + 2 * r;  // rows y0 - r .. y1 + r

  // Row-pass cells needed: column x, rows within r of an assigned pixel.
  scratch.diff.assign(static_cast<std::size_t>(bw) * (bh + 1), 0);
  for (const auto& px : pixels) {
    const int col = px.x - x0;
    const int top = px.y - y0;  // == (px.y - r) - (y0 - r)
    scratch.diff[static_cast<std::size_t>(col) * (bh + 1) + top] += 1;
    scratch.diff[static_cast<std::size_t>(col) * (bh + 1) + top + 2 * r + 1] -= 1;
  }
  scratch.needed.assign(static_cast<std::size_t>(bw) * bh, 0);
  std::size_t needed_cells = 0;
  for (int col = 0; col < bw; ++col) {
    int run = 0;
    for (int row = 0; row < bh; ++row) {
      run += scratch.diff[static_cast<std::size_t>(col) * (bh + 1) + row];
      if (run > 0) {
        scratch.needed[static_cast<std::size_t>(row) * bw + col] = 1;
        ++needed_cells;
      }
    }
  }

  const double direct_cost = static_cast<double>(pixels.size()) * s * s;
  const double separable_cost = 3.0 * s * static_cast<double>(needed_cells + pixels.size());
  if (direct_cost <= separable_cost) {
    for (const auto& px : pixels) out(px.x, px.y) = correlate_direct(p, k, px.x, px.y);
    return;
  }

  scratch.rc.assign(static_cast<std::size_t>(bw) * bh, 0.0);
  scratch.rs.assign(static_cast<std::size_t>(bw) * bh, 0.0);
  scratch.rm.assign(static_cast<std::size_t>(bw) * bh, 0.0);
  for (int row = 0; row < bh; ++row) {
    const int y = y0 - r + row;
    for (int col = 0; col < bw; ++col) {
      const std::size_t cell = static_cast<std::size_t>(row) * bw + col;
      if (!scratch.needed[cell]) continue;
      const double* src = p.at(x0 + col - r, y);
      double c = 0.0, sn = 0.0, m = 0.0;
      for (int i = 0; i < s; ++i) {
        c += k.cos_x[i] * src[i];
        sn += k.sin_x[i] * src[i];
        m += src[i];
      }
      scratch.rc[cell] = c;
      scratch.rs[cell] = sn;
      scratch.rm[cell] = m;
    }
  }
  for (const auto& px : pixels) {
    const int col = px.x - x0;
    const int top = px.y - y0;
    double c = 0.0, sn = 0.0, m = 0.0;
    for (int i = 0; i < s; ++i) {
      const std::size_t cell = static_cast<std::size_t>(top + i) * bw + col;
      c += k.cos_y[i] * scratch.rc[cell];
      sn += k.sin_y[i] * scratch.rs[cell];
      m += scratch.rm[cell];
    }
    out(px.x, px.y) = (c - sn - k.mean * m) / k.norm;
  }
}

}  // namespace

FilterIndexMap assign_filters(const GaborBank& bank, const SegmentationMask& mask,
                              const OrientationField& orientation, const FrequencyMap& frequency) {
  require_same_size("assign_filters", mask, orientation, frequency);
  if (bank.size() >= kNoFilter) throw ParameterError("assign_filters: bank too large");
  FilterIndexMap out(mask.width(), mask.height(), kNoFilter);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.pixels()[i]) continue;
    out.pixels()[i] = static_cast<std::uint16_t>(
        bank.select(orientation.pixels()[i], frequency.pixels()[i]));
  }
  return out;
}

RealMap prepare_fingerprint(const GrayImage& image) {
  RealMap out(image.width(), image.height());
  double sum = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.pixels()[i] = 255.0 - image.pixels()[i];
    sum += out.pixels()[i];
  }
  const double mean = sum / static_cast<double>(image.size());
  for (auto& v : out.pixels()) v -= mean;
  return out;
}

RealMap prepare_skeleton(const GrayImage& skeleton) {
  RealMap out(skeleton.width(), skeleton.height());
  double sum = 0.0;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    out.pixels()[i] = skeleton.pixels()[i] ? 1.0 : 0.0;
    sum += out.pixels()[i];
  }
  const double mean = sum / static_cast<double>(skeleton.size());
  for (auto& v : out.pixels()) v -= mean;
  return out;
}

RealMap contextual_response(const RealMap& input, const FilterIndexMap& assignment,
                            const GaborBank& bank, FilterStrategy strategy, int threads) {
  require_same_size("contextual_response", input, assignment);
  const int w = input.width();
  const int h = input.height();

  int pad = 0;
  std::vector<std::vector<Pixel>> groups(bank.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = assignment(x, y);
      if (idx == kNoFilter) continue;
      if (idx >= bank.size()) throw ParameterError("contextual_response: bank index out of range");
      groups[idx].push_back({x, y});
      pad = std::max(pad, bank.kernel(idx).radius());
    }
  }
  RealMap out(w, h, 0.0);
  const Padded padded = pad_replicate(input, pad);

  if (strategy == FilterStrategy::Naive) {
    parallel_chunks(h, threads, [&](int begin, int end, int) {
      for (int y = begin; y < end; ++y) {
        for (int x = 0; x < w; ++x) {
          const auto idx = assignment(x, y);
          if (idx == kNoFilter) continue;
          out(x, y) = correlate_direct(padded, bank.kernel(idx), x, y);
        }
      }
    });
    return out;
  }

  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!groups[i].empty()) used.push_back(i);
  }
  // Each pixel belongs to exactly one group, so workers never write the
  // same output cell.
  parallel_chunks(static_cast<int>(used.size()), threads, [&](int begin, int end, int) {
    SeparableScratch scratch;
    for (int u = begin; u < end; ++u) {
      filter_group(padded, bank.kernel(used[u]), groups[used[u]], out, scratch);
    }
  });
  return out;
}

EnhancedImage finalize_response(const RealMap& response, const SegmentationMask& mask,
                                OutputMode mode) {
  require_same_size("finalize_response", response, mask);
  EnhancedImage out(mask.width(), mask.height(), 0.0f);
  if (mode == OutputMode::Binary) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mask.pixels()[i] && response.pixels()[i] > 0.0) out.pixels()[i] = 1.0f;
    }
    return out;
  }
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.pixels()[i]) continue;
    const double v = response.pixels()[i];
    if (first) {
      lo = hi = v;
      first = false;
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (first || hi <= lo) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.pixels()[i]) continue;
    const double v = (response.pixels()[i] - lo) / (hi - lo);
    out.pixels()[i] = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
  }
  return out;
}

EnhancedImage enhance_gbfen(const GrayImage& image, const SegmentationMask& mask,
                            const OrientationField& orientation, const FrequencyMap& frequency,
                            const GaborBank& bank, const EnhanceOptions& options) {
  require_same_size("enhance_gbfen", image, mask, orientation, frequency);
  require_foreground("enhance_gbfen", mask);
  const auto assignment = assign_filters(bank, mask, orientation, frequency);
  const auto response =
      contextual_response(prepare_fingerprint(image), assignment, bank, options.strategy,
                          options.threads);
  return finalize_response(response, mask, options.output_mode);
}

EnhancedImage gt_enhance(const GrayImage& skeleton, const OrientationField& orientation,
                         const FrequencyMap& frequency, const SegmentationMask& mask,
                         const GaborBank& bank, const EnhanceOptions& options) {
  require_same_size("gt_enhance", skeleton, mask, orientation, frequency);
  require_foreground("gt_enhance", mask);
  const auto assignment = assign_filters(bank, mask, orientation, frequency);
  const auto response = contextual_response(prepare_skeleton(skeleton), assignment, bank,
                                            options.strategy, options.threads);
  return finalize_response(response, mask, options.output_mode);
}

}  // namespace fpe
