// Copyright 2026 The STOC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOC_CHECKPOINT_H_
#define STOC_CHECKPOINT_H_

#include <iosfwd>
#include <string>

#include "stoc/pipeline.h"
#include "stoc/repr.h"

namespace stoc {

// Versioned little-endian binary checkpoints. Doubles are stored as raw
// IEEE-754 bits, so a load reproduces the saved model exactly.
//
// Representation layout (after the "STOCREPR" magic and a u32 version):
//   bank seed, M, r, d, the M projection matrices,
//   hyperparameters, flat parameters, momentum buffers,
//   GDE count followed by (mean, lower factor, shrinkage) per GDE.
// Pipeline layout ("STOCPIPE"): config JSON, mode, representation, input
// dims, optional representation block, optional raw GDE, final pool,
// refinement history.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveRepr(std::ostream& out, const ReprModel& model);
ReprModel LoadRepr(std::istream& in);

void SavePipeline(std::ostream& out, const StocPipeline& pipeline,
                  const StocConfig& config);
StocPipeline LoadPipeline(std::istream& in, StocConfig* config = nullptr);

void SavePipelineFile(const std::string& path, const StocPipeline& pipeline,
                      const StocConfig& config);
StocPipeline LoadPipelineFile(const std::string& path,
                              StocConfig* config = nullptr);

// Config <-> JSON text, used in checkpoints and manifests.
std::string ConfigToJson(const StocConfig& config);
StocConfig ConfigFromJson(const std::string& text);

}  // namespace stoc

#endif  // STOC_CHECKPOINT_H_
