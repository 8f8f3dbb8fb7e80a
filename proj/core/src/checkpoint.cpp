#include "steal/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

#include "steal/errors.hpp"

namespace steal {

using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'T', 'E', 'A', 'L', 'C', 'K', '1'};

struct NamedTensor {
  std::string name;
  const Tensor* tensor;
};

std::vector<NamedTensor> tensor_directory(const Checkpoint& ckpt) {
  std::vector<NamedTensor> out;
  const auto& layers = ckpt.model.layers();
  const auto& schedule = ckpt.model.schedule();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = schedule[l].name;
    out.push_back({base + ".weight", &layers[l].weight});
    out.push_back({base + ".bias", &layers[l].bias});
    if (!layers[l].gamma.empty()) {
      out.push_back({base + ".gamma", &layers[l].gamma});
      out.push_back({base + ".beta", &layers[l].beta});
      out.push_back({base + ".running_mean", &layers[l].running_mean});
      out.push_back({base + ".running_var", &layers[l].running_var});
    }
  }
  for (std::size_t i = 0; i < ckpt.adam_m.size(); ++i) {
    out.push_back({"adam.m." + std::to_string(i), &ckpt.adam_m[i]});
    out.push_back({"adam.v." + std::to_string(i), &ckpt.adam_v[i]});
  }
  return out;
}

std::vector<std::pair<std::string, Tensor*>> tensor_slots(Checkpoint& ckpt) {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto& layers = ckpt.model.layers();
  const auto& schedule = ckpt.model.schedule();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = schedule[l].name;
    out.emplace_back(base + ".weight", &layers[l].weight);
    out.emplace_back(base + ".bias", &layers[l].bias);
    if (!layers[l].gamma.empty()) {
      out.emplace_back(base + ".gamma", &layers[l].gamma);
      out.emplace_back(base + ".beta", &layers[l].beta);
      out.emplace_back(base + ".running_mean", &layers[l].running_mean);
      out.emplace_back(base + ".running_var", &layers[l].running_var);
    }
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
  const auto dir = tensor_directory(ckpt);
  json header;
  header["format"] = kCheckpointFormat;
  header["preset"] = preset_to_string(ckpt.preset);
  header["step"] = ckpt.step;
  header["adam_t"] = ckpt.adam_t;
  header["adam_tensors"] = ckpt.adam_m.size();
  header["rng_state"] = ckpt.rng_state;
  header["config"] = ckpt.config;
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : dir) {
    json t;
    t["name"] = name;
    t["shape"] = tensor->shape();
    t["offset"] = offset;
    t["count"] = tensor->numel();
    tensors.push_back(t);
    offset += tensor->numel() * sizeof(float);
  }
  header["tensors"] = tensors;

  const std::string head = header.dump();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + file.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& [name, tensor] : dir) {
    out.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(tensor->numel() * sizeof(float)));
  }
  if (!out) throw DataError("short write while saving checkpoint: " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + file.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file: " + file.string());
  }
  std::uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len));
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw DataError("truncated checkpoint header: " + file.string());

  json header;
  try {
    header = json::parse(head);
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint header: " + std::string(e.what()));
  }
  if (header.value("format", "") != kCheckpointFormat) {
    throw DataError("unsupported checkpoint format tag: '" +
                    header.value("format", std::string("<missing>")) + "'");
  }

  Checkpoint ckpt;
  ckpt.preset = preset_from_string(header.at("preset").get<std::string>());
  ckpt.step = header.at("step").get<long long>();
  ckpt.adam_t = header.value("adam_t", 0LL);
  ckpt.rng_state = header.value("rng_state", "");
  if (header.contains("config")) {
    ckpt.config = header["config"].get<std::map<std::string, std::string>>();
  }
  ckpt.model = Autoencoder<float>(ckpt.preset, 0);

  auto slots = tensor_slots(ckpt);
  const std::size_t n_adam = header.value("adam_tensors", std::size_t{0});
  ckpt.adam_m.resize(n_adam);
  ckpt.adam_v.resize(n_adam);

  const std::uint64_t payload_base = sizeof(kMagic) + sizeof(head_len) + head_len;
  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<std::vector<int>>();
    const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
    const std::uint64_t count = t.at("count").get<std::uint64_t>();

    Tensor* dst = nullptr;
    for (auto& [slot_name, slot] : slots) {
      if (slot_name == name) {
        dst = slot;
        break;
      }
    }
    if (dst == nullptr && name.rfind("adam.", 0) == 0) {
      const bool is_m = name.rfind("adam.m.", 0) == 0;
      const std::size_t idx = std::stoul(name.substr(7));
      auto& vec = is_m ? ckpt.adam_m : ckpt.adam_v;
      if (idx >= vec.size()) throw DataError("checkpoint adam index out of range: " + name);
      vec[idx] = Tensor(shape);
      dst = &vec[idx];
    }
    if (dst == nullptr) throw DataError("unknown tensor in checkpoint: " + name);
    if (!dst->shape().empty() && dst->shape() != shape && name.rfind("adam.", 0) != 0) {
      throw DataError("checkpoint tensor shape mismatch for " + name);
    }
    if (dst->numel() != count) {
      *dst = Tensor(shape);
      if (dst->numel() != count) {
        throw DataError("checkpoint tensor count mismatch for " + name);
      }
    }
    in.seekg(static_cast<std::streamoff>(payload_base + offset));
    in.read(reinterpret_cast<char*>(dst->data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw DataError("truncated checkpoint payload at tensor " + name);
  }
  return ckpt;
}

}  // namespace steal
