// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

constexpr char kMagic[4] = {'D', 'D', 'C', 'K'};

std::string activation_name(Activation a) { return a == Activation::silu ? "silu" : "relu"; }

Activation parse_activation(const std::string& s) {
  if (s == "silu") return Activation::silu;
  if (s == "relu") return Activation::relu;
  throw FormatError("unknown activation '" + s + "'");
}

template <typename Real>
std::vector<NdArray<Real>> cast_all(const std::vector<NdArray<double>>& xs) {
  std::vector<NdArray<Real>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.cast<Real>());
  return out;
}

}  // namespace

template <typename Real>
MlpDenoiser<Real> Checkpoint::model(bool use_ema) const {
  const auto& src = use_ema && !ema.empty() ? ema : params;
  return MlpDenoiser<Real>(architecture, cast_all<Real>(src));
}

template MlpDenoiser<float> Checkpoint::model<float>(bool) const;
template MlpDenoiser<double> Checkpoint::model<double>(bool) const;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::ordered_json m;
  const auto& a = ckpt.architecture;
  m["architecture"] = {{"data_dim", a.data_dim},   {"hidden", a.hidden},
                       {"embed_dim", a.embed_dim}, {"max_period", a.max_period},
                       {"activation", activation_name(a.activation)}};
  const auto& s = ckpt.schedule;
  m["schedule"] = {{"kind", to_string(s.kind)},     {"steps", s.steps},
                   {"beta_start", s.beta_start},    {"beta_end", s.beta_end},
                   {"cosine_offset", s.cosine_offset}, {"beta_clip", s.beta_clip}};
  m["mode"] = to_string(ckpt.mode);
  m["gamma"] = ckpt.gamma;
  m["step"] = ckpt.step;
  m["precision"] = to_string(ckpt.precision);
  m["param_tensors"] = ckpt.params.size();
  m["ema_tensors"] = ckpt.ema.size();
  try {
    m["metadata"] = nlohmann::ordered_json::parse(ckpt.metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  const std::string manifest = m.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(manifest.size()));
  out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  for (const auto* group : {&ckpt.params, &ckpt.ema})
    for (const auto& t : *group) {
      if (ckpt.precision == Precision::float32)
        write_tensor(out, t.cast<float>());
      else
        write_tensor(out, t);
    }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
    throw FormatError(path.string() + " is not a checkpoint");
  const std::uint32_t len = read_u32(in);
  std::string manifest(len, '\0');
  if (!in.read(manifest.data(), len)) throw FormatError("checkpoint manifest truncated");

  Checkpoint c;
  try {
    const auto m = nlohmann::json::parse(manifest);
    const auto& a = m.at("architecture");
    c.architecture.data_dim = a.at("data_dim").get<std::size_t>();
    c.architecture.hidden = a.at("hidden").get<std::vector<std::size_t>>();
    c.architecture.embed_dim = a.at("embed_dim").get<std::size_t>();
    c.architecture.max_period = a.at("max_period").get<double>();
    c.architecture.activation = parse_activation(a.at("activation").get<std::string>());
    const auto& s = m.at("schedule");
    c.schedule.kind = parse_schedule_kind(s.at("kind").get<std::string>());
    c.schedule.steps = s.at("steps").get<int>();
    c.schedule.beta_start = s.at("beta_start").get<double>();
    c.schedule.beta_end = s.at("beta_end").get<double>();
    c.schedule.cosine_offset = s.at("cosine_offset").get<double>();
    c.schedule.beta_clip = s.at("beta_clip").get<double>();
    c.mode = parse_train_mode(m.at("mode").get<std::string>());
    c.gamma = m.at("gamma").get<double>();
    c.step = m.at("step").get<std::int64_t>();
    c.precision = parse_precision(m.at("precision").get<std::string>());
    const auto np = m.at("param_tensors").get<std::size_t>();
    const auto ne = m.at("ema_tensors").get<std::size_t>();
    c.metadata_json = m.at("metadata").dump();
    for (std::size_t i = 0; i < np; ++i) c.params.push_back(read_tensor<double>(in));
    for (std::size_t i = 0; i < ne; ++i) c.ema.push_back(read_tensor<double>(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad checkpoint manifest in " + path.string() + ": " + e.what());
  }
  return c;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string parameter_digest(const Checkpoint& ckpt) {
  std::ostringstream os(std::ios::binary);
  for (const auto* set : {&ckpt.params, &ckpt.ema})
    for (const auto& a : *set) {
      if (ckpt.precision == Precision::float32)
        write_tensor(os, a.cast<float>());
      else
        write_tensor(os, a);
    }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(os.str())));
  return buf;
}

}  // namespace difflab
