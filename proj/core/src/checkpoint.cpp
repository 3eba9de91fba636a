// Copyright 2026 The sedkit Authors
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

#include "sedkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sedkit {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'E', 'D', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) {
    throw ParseError(std::string("checkpoint: truncated reading ") + what);
  }
  return v;
}

void write_array(std::ostream& out, const NamedArray& arr) {
  write_u32(out, static_cast<std::uint32_t>(arr.name.size()));
  out.write(arr.name.data(), static_cast<std::streamsize>(arr.name.size()));
  const std::uint8_t rank = static_cast<std::uint8_t>(arr.shape.size());
  out.write(reinterpret_cast<const char*>(&rank), 1);
  std::size_t n = 1;
  for (int e : arr.shape) {
    write_u32(out, static_cast<std::uint32_t>(e));
    n *= static_cast<std::size_t>(e);
  }
  if (n != arr.data.size()) {
    throw ContractError("checkpoint: array \"" + arr.name + "\" has " +
                        std::to_string(arr.data.size()) + " values for shape " +
                        format_shape(arr.shape));
  }
  out.write(reinterpret_cast<const char*>(arr.data.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
}

NamedArray read_array(std::istream& in) {
  NamedArray arr;
  const std::uint32_t name_len = read_u32(in, "record name length");
  arr.name.resize(name_len);
  if (!in.read(arr.name.data(), name_len)) {
    throw ParseError("checkpoint: truncated reading record name");
  }
  std::uint8_t rank = 0;
  if (!in.read(reinterpret_cast<char*>(&rank), 1)) {
    throw ParseError("checkpoint: truncated reading rank of " + arr.name);
  }
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) {
    const std::uint32_t e = read_u32(in, "extent");
    if (e == 0) {
      throw FormatError("checkpoint: zero extent in " + arr.name);
    }
    arr.shape.push_back(static_cast<int>(e));
    n *= e;
  }
  arr.data.resize(n);
  if (!in.read(reinterpret_cast<char*>(arr.data.data()),
               static_cast<std::streamsize>(n * sizeof(float)))) {
    throw ParseError("checkpoint: truncated reading data of " + arr.name);
  }
  return arr;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot write " + path);

  nlohmann::ordered_json header;
  header["model"] = nlohmann::ordered_json::parse(
      model_config_to_json(ckpt.model));
  header["epoch"] = ckpt.epoch;
  header["best_dev_f1_final"] = ckpt.best_dev_f1_final;
  if (ckpt.adam) {
    nlohmann::ordered_json adam;
    adam["lr"] = ckpt.adam->config.lr;
    adam["beta1"] = ckpt.adam->config.beta1;
    adam["beta2"] = ckpt.adam->config.beta2;
    adam["eps"] = ckpt.adam->config.eps;
    adam["steps"] = ckpt.adam->steps;
    header["adam"] = adam;
  } else {
    header["adam"] = nullptr;
  }
  const std::string header_text = header.dump();

  out.write(kMagic, 4);
  write_u32(out, ckpt.version);
  write_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  for (const auto& arr : ckpt.params) write_array(out, arr);
  if (ckpt.adam) {
    for (const auto& arr : ckpt.adam->m) {
      NamedArray rec = arr;
      rec.name = "optim.m/" + rec.name;
      write_array(out, rec);
    }
    for (const auto& arr : ckpt.adam->v) {
      NamedArray rec = arr;
      rec.name = "optim.v/" + rec.name;
      write_array(out, rec);
    }
  }
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4)) throw ParseError("checkpoint: truncated magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint: " + path + " has bad magic");
  }
  Checkpoint ckpt;
  ckpt.version = read_u32(in, "version");
  if (ckpt.version != kVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(ckpt.version));
  }
  const std::uint32_t header_len = read_u32(in, "header length");
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), header_len)) {
    throw ParseError("checkpoint: truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("checkpoint: header: ") + e.what());
  }
  ckpt.model = model_config_from_json(header.at("model").dump());
  ckpt.epoch = header.value("epoch", 0);
  ckpt.best_dev_f1_final = header.value("best_dev_f1_final", 0.0);
  const bool expect_adam =
      header.contains("adam") && !header["adam"].is_null();
  if (expect_adam) {
    AdamSnapshot snap;
    const auto& adam = header["adam"];
    snap.config.lr = adam.value("lr", snap.config.lr);
    snap.config.beta1 = adam.value("beta1", snap.config.beta1);
    snap.config.beta2 = adam.value("beta2", snap.config.beta2);
    snap.config.eps = adam.value("eps", snap.config.eps);
    snap.steps = adam.value("steps", std::int64_t{0});
    ckpt.adam = std::move(snap);
  }

  while (in.peek() != EOF) {
    NamedArray arr = read_array(in);
    if (arr.name.rfind("optim.m/", 0) == 0) {
      if (!ckpt.adam) {
        throw FormatError("checkpoint: optimizer record without adam header");
      }
      arr.name = arr.name.substr(8);
      ckpt.adam->m.push_back(std::move(arr));
    } else if (arr.name.rfind("optim.v/", 0) == 0) {
      if (!ckpt.adam) {
        throw FormatError("checkpoint: optimizer record without adam header");
      }
      arr.name = arr.name.substr(8);
      ckpt.adam->v.push_back(std::move(arr));
    } else {
      ckpt.params.push_back(std::move(arr));
    }
  }
  return ckpt;
}

}  // namespace sedkit
