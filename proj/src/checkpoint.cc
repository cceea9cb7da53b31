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

#include "stoc/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace stoc {
namespace {

constexpr char kReprMagic[8] = {'S', 'T', 'O', 'C', 'R', 'E', 'P', 'R'};
constexpr char kPipeMagic[8] = {'S', 'T', 'O', 'C', 'P', 'I', 'P', 'E'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void Bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("checkpoint write failed");
  }
  void U64(std::uint64_t v) { Bytes(&v, sizeof v); }
  void I64(std::int64_t v) { Bytes(&v, sizeof v); }
  void F64(double v) { Bytes(&v, sizeof v); }
  void Str(const std::string& s) {
    U64(s.size());
    Bytes(s.data(), s.size());
  }
  void Vec(const Vector& v) {
    U64(static_cast<std::uint64_t>(v.size()));
    Bytes(v.data(), sizeof(double) * v.size());
  }
  void Mat(const Matrix& m) {
    U64(static_cast<std::uint64_t>(m.rows()));
    U64(static_cast<std::uint64_t>(m.cols()));
    Bytes(m.data(), sizeof(double) * m.size());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void Bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("checkpoint truncated");
  }
  std::uint64_t U64() {
    std::uint64_t v;
    Bytes(&v, sizeof v);
    return v;
  }
  std::int64_t I64() {
    std::int64_t v;
    Bytes(&v, sizeof v);
    return v;
  }
  double F64() {
    double v;
    Bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t Size() {
    const std::uint64_t n = U64();
    if (n > (std::uint64_t{1} << 34)) {
      throw std::runtime_error("checkpoint size field is implausible");
    }
    return n;
  }
  std::string Str() {
    std::string s(Size(), '\0');
    Bytes(s.data(), s.size());
    return s;
  }
  Vector Vec() {
    Vector v(static_cast<Index>(Size()));
    Bytes(v.data(), sizeof(double) * v.size());
    return v;
  }
  Matrix Mat() {
    const auto rows = static_cast<Index>(Size());
    const auto cols = static_cast<Index>(Size());
    Matrix m(rows, cols);
    Bytes(m.data(), sizeof(double) * m.size());
    return m;
  }

 private:
  std::istream& in_;
};

void WriteHeader(Writer& w, const char (&magic)[8]) {
  w.Bytes(magic, sizeof magic);
  const std::uint32_t version = kCheckpointVersion;
  w.Bytes(&version, sizeof version);
}

void ReadHeader(Reader& r, const char (&magic)[8]) {
  char found[8];
  r.Bytes(found, sizeof found);
  if (std::memcmp(found, magic, sizeof found) != 0) {
    throw std::runtime_error("not a checkpoint of the expected kind");
  }
  std::uint32_t version;
  r.Bytes(&version, sizeof version);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
}

void WriteGde(Writer& w, const GdeModel& g) {
  w.Vec(g.mean());
  w.Mat(g.factor());
  w.F64(g.shrinkage());
}

GdeModel ReadGde(Reader& r) {
  Vector mean = r.Vec();
  Matrix factor = r.Mat();
  const double shrinkage = r.F64();
  return GdeModel::FromParameters(std::move(mean), std::move(factor),
                                  shrinkage);
}

void WriteReprBody(Writer& w, const ReprModel& model) {
  const TransformationBank& bank = model.bank();
  w.U64(bank.seed());
  w.U64(static_cast<std::uint64_t>(bank.count()));
  for (int m = 0; m < bank.count(); ++m) w.Mat(bank.projection(m));
  const ReprHyperparameters& h = model.hyper();
  w.I64(h.batch_rows);
  w.F64(h.learning_rate);
  w.F64(h.momentum);
  w.F64(h.weight_decay);
  w.Vec(model.params());
  w.Vec(model.velocity());
  w.U64(model.gdes().size());
  for (const GdeModel& g : model.gdes()) WriteGde(w, g);
}

ReprModel ReadReprBody(Reader& r) {
  const std::uint64_t seed = r.U64();
  const std::uint64_t count = r.Size();
  std::vector<Matrix> projections;
  for (std::uint64_t m = 0; m < count; ++m) projections.push_back(r.Mat());
  TransformationBank bank(std::move(projections), seed);
  ReprHyperparameters h;
  h.batch_rows = r.I64();
  h.learning_rate = r.F64();
  h.momentum = r.F64();
  h.weight_decay = r.F64();
  Vector params = r.Vec();
  Vector velocity = r.Vec();
  std::vector<GdeModel> gdes(r.Size());
  for (auto& g : gdes) g = ReadGde(r);
  return ReprModel(std::move(bank), h, std::move(params), std::move(velocity),
                   std::move(gdes));
}

}  // namespace

void SaveRepr(std::ostream& out, const ReprModel& model) {
  Writer w(out);
  WriteHeader(w, kReprMagic);
  WriteReprBody(w, model);
}

ReprModel LoadRepr(std::istream& in) {
  Reader r(in);
  ReadHeader(r, kReprMagic);
  return ReadReprBody(r);
}

void SavePipeline(std::ostream& out, const StocPipeline& pipeline,
                  const StocConfig& config) {
  Writer w(out);
  WriteHeader(w, kPipeMagic);
  w.Str(ConfigToJson(config));
  w.Str(ToString(pipeline.mode()));
  w.Str(ToString(pipeline.representation()));
  w.I64(pipeline.input_dims());
  w.U64(pipeline.repr().has_value());
  if (pipeline.repr()) WriteReprBody(w, *pipeline.repr());
  w.U64(pipeline.gde().has_value());
  if (pipeline.gde()) WriteGde(w, *pipeline.gde());
  w.U64(pipeline.final_pool().size());
  for (Index i : pipeline.final_pool()) w.I64(i);
  w.U64(pipeline.history().size());
  for (const RefinementRecord& h : pipeline.history()) {
    w.I64(h.epoch);
    w.I64(h.step);
    w.I64(h.kept);
    w.I64(h.rejected);
    w.U64(h.anomalies_excluded.has_value());
    w.F64(h.anomalies_excluded.value_or(0.0));
    w.U64(h.normals_excluded.has_value());
    w.F64(h.normals_excluded.value_or(0.0));
  }
}

StocPipeline LoadPipeline(std::istream& in, StocConfig* config) {
  Reader r(in);
  ReadHeader(r, kPipeMagic);
  const StocConfig stored = ConfigFromJson(r.Str());
  if (config != nullptr) *config = stored;
  const Mode mode = ParseMode(r.Str());
  const Representation representation = ParseRepresentation(r.Str());
  const Index dims = r.I64();
  std::optional<ReprModel> repr;
  if (r.U64()) repr = ReadReprBody(r);
  std::optional<GdeModel> gde;
  if (r.U64()) gde = ReadGde(r);
  IndexList pool(r.Size());
  for (Index& i : pool) i = r.I64();
  std::vector<RefinementRecord> history(r.Size());
  for (RefinementRecord& h : history) {
    h.epoch = static_cast<int>(r.I64());
    h.step = r.I64();
    h.kept = r.I64();
    h.rejected = r.I64();
    const bool has_a = r.U64() != 0;
    const double a = r.F64();
    const bool has_n = r.U64() != 0;
    const double n = r.F64();
    if (has_a) h.anomalies_excluded = a;
    if (has_n) h.normals_excluded = n;
  }
  return StocPipeline(mode, representation, std::move(repr), std::move(gde),
                      std::move(history), std::move(pool), dims);
}

void SavePipelineFile(const std::string& path, const StocPipeline& pipeline,
                      const StocConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  SavePipeline(out, pipeline, config);
}

StocPipeline LoadPipelineFile(const std::string& path, StocConfig* config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return LoadPipeline(in, config);
}

std::string ConfigToJson(const StocConfig& c) {
  nlohmann::json j = {
      {"mode", ToString(c.mode)},
      {"representation", ToString(c.representation)},
      {"k", c.ensemble_count},
      {"gamma", c.gamma},
      {"shrinkage", c.shrinkage},
      {"transforms", c.repr.transforms},
      {"projection_dims", c.repr.projection_dims},
      {"batch_rows", c.repr.batch_rows},
      {"learning_rate", c.repr.learning_rate},
      {"momentum", c.repr.momentum},
      {"weight_decay", c.repr.weight_decay},
      {"train_steps", c.train_steps},
      {"schedule_epochs", c.schedule.epochs},
      {"schedule_repeat_every", c.schedule.repeat_every},
      {"master_seed", c.master_seed}};
  return j.dump();
}

StocConfig ConfigFromJson(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  StocConfig c;
  c.mode = ParseMode(j.at("mode").get<std::string>());
  c.representation =
      ParseRepresentation(j.at("representation").get<std::string>());
  c.ensemble_count = j.at("k").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.shrinkage = j.at("shrinkage").get<double>();
  c.repr.transforms = j.at("transforms").get<int>();
  c.repr.projection_dims = j.at("projection_dims").get<Index>();
  c.repr.batch_rows = j.at("batch_rows").get<Index>();
  c.repr.learning_rate = j.at("learning_rate").get<double>();
  c.repr.momentum = j.at("momentum").get<double>();
  c.repr.weight_decay = j.at("weight_decay").get<double>();
  c.train_steps = j.at("train_steps").get<std::int64_t>();
  c.schedule.epochs = j.at("schedule_epochs").get<std::vector<int>>();
  c.schedule.repeat_every = j.at("schedule_repeat_every").get<int>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  return c;
}

}  // namespace stoc
