// Copyright 2026 The mpmqir Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Whole-image compression: one independent circuit per colour channel,
// trained on the normalized channel, packed into a Checkpoint.

#include <cstddef>
#include <exception>
#include <vector>

#include "mpmqir/ansatz.hpp"
#include "mpmqir/dataio.hpp"
#include "mpmqir/metrics.hpp"
#include "mpmqir/postproc.hpp"
#include "mpmqir/train.hpp"

namespace mpmqir {

struct CompressOptions {
  AnsatzId ansatz = AnsatzId::MPM;
  unsigned layers = 1;
  TrainConfig train;
  /// Channels trained concurrently. Results do not depend on this.
  unsigned jobs = 1;
};

struct CompressResult {
  Checkpoint checkpoint;
  std::vector<TrainTrace> traces;  // one per channel
  UnitImage recon;                 // before byte quantization
  ByteImage recon_bytes;
  QualityReport report;            // unit-domain reconstruction vs normalized input
  QualityReport quantized_report;  // byte-rounded reconstruction vs input
};

namespace detail {

// Runs f(i) for i in [0, count) on up to `jobs` threads; rethrows the first
// failure (lowest index) after all workers finish.
template <typename F>
inline void run_jobs(std::size_t count, unsigned jobs, F&& f) {
  std::vector<std::exception_ptr> errors(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline CompressResult compress_image(const ByteImage& image, const CompressOptions& opts) {
  opts.train.validate();
  const UnitImage target = normalize(image);
  const unsigned m = qubits_for_pixels(image.pixels());
  const CircuitTemplate tmpl = build_ansatz(opts.ansatz, m, opts.layers);

  CompressResult out;
  Checkpoint& c = out.checkpoint;
  c.ansatz = opts.ansatz;
  c.qubits = m;
  c.layers = opts.layers;
  c.width = image.width;
  c.height = image.height;
  c.channels = image.channels;
  c.stats.resize(image.channels);
  c.params.resize(image.channels);
  out.traces.resize(image.channels);

  detail::run_jobs(image.channels, opts.jobs, [&](std::size_t ch) {
    const std::vector<double> plane = target.channel(ch);
    c.stats[ch] = channel_stats(plane);
    out.traces[ch] = train_channel(tmpl, plane, c.stats[ch], opts.train);
    c.params[ch] = out.traces[ch].params;
  });

  std::vector<std::vector<double>> planes;
  for (const auto& t : out.traces) planes.push_back(t.recon);
  out.recon = UnitImage::from_channels(image.width, image.height, planes);
  out.recon_bytes = denormalize(out.recon);
  out.report = evaluate(target, out.recon, tmpl.param_count);
  out.quantized_report = evaluate(target, normalize(out.recon_bytes), tmpl.param_count);
  return out;
}

}  // namespace mpmqir
