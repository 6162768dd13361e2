#include "temarl/checkpoint.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "temarl/dense_net.h"
#include "temarl/errors.h"

namespace temarl {
namespace {

constexpr const char* kMagic = "temarl-checkpoint";
constexpr int kVersion = 1;

std::string LayerKey(const std::string& prefix, std::size_t i, const char* what) {
  return prefix + ".l" + std::to_string(i) + "." + what;
}

bool ValidToken(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

}  // namespace

void Checkpoint::put_net(const std::string& prefix, const DenseNet& net) {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    arrays[LayerKey(prefix, i, "w")] = net.layer(i).weight.value;
    arrays[LayerKey(prefix, i, "b")] = net.layer(i).bias.value;
  }
}

bool Checkpoint::has_net(const std::string& prefix) const {
  return arrays.count(LayerKey(prefix, 0, "w")) != 0;
}

void Checkpoint::get_net(const std::string& prefix, DenseNet& net) const {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    for (const char* what : {"w", "b"}) {
      const std::string key = LayerKey(prefix, i, what);
      auto it = arrays.find(key);
      if (it == arrays.end()) throw ContractViolation("checkpoint is missing array '" + key + "'");
      Matrix& dst = what[0] == 'w' ? net.layer(i).weight.value : net.layer(i).bias.value;
      Require(it->second.rows() == dst.rows() && it->second.cols() == dst.cols(),
              "checkpoint array '" + key + "' has shape " + std::to_string(it->second.rows()) + "x" +
                  std::to_string(it->second.cols()) + ", network expects " +
                  std::to_string(dst.rows()) + "x" + std::to_string(dst.cols()));
      dst = it->second;
    }
  }
}

const std::string& Checkpoint::meta_at(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw ContractViolation("checkpoint has no metadata key '" + key + "'");
  return it->second;
}

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kVersion << '\n';
  for (const auto& [key, value] : ckpt.meta) {
    Require(ValidToken(key), "checkpoint metadata key must be a non-empty token");
    Require(value.find('\n') == std::string::npos, "checkpoint metadata value spans lines");
    out << "meta " << key << ' ' << value << '\n';
  }
  out << std::hexfloat;
  for (const auto& [name, m] : ckpt.arrays) {
    Require(ValidToken(name), "checkpoint array name must be a non-empty token");
    out << "array " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ' ';
        out << m(i, j);
      }
      out << '\n';
    }
  }
  out << std::defaultfloat;
}

Checkpoint ReadCheckpoint(std::istream& in) {
  Checkpoint ckpt;
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) {
    throw ContractViolation("not a temarl checkpoint");
  }
  Require(version == kVersion, "unsupported checkpoint version " + std::to_string(version));
  std::string tag;
  while (in >> tag) {
    if (tag == "meta") {
      std::string key, value;
      in >> key;
      std::getline(in, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      ckpt.meta[key] = value;
    } else if (tag == "array") {
      std::string name;
      long rows = -1, cols = -1;
      if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0) {
        throw ContractViolation("malformed array header in checkpoint");
      }
      Matrix m(rows, cols);
      std::string token;
      for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < cols; ++j) {
          if (!(in >> token)) throw ContractViolation("truncated array '" + name + "' in checkpoint");
          // strtod parses hexfloats exactly; istream >> double does not on every libstdc++.
          char* end = nullptr;
          m(i, j) = std::strtod(token.c_str(), &end);
          if (end == token.c_str() || *end != '\0') {
            throw ContractViolation("bad number '" + token + "' in array '" + name + "'");
          }
        }
      }
      ckpt.arrays[name] = std::move(m);
    } else {
      throw ContractViolation("unexpected token '" + tag + "' in checkpoint");
    }
  }
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw ContractViolation("cannot open '" + path + "' for writing");
  WriteCheckpoint(out, ckpt);
  if (!out) throw ContractViolation("failed writing checkpoint '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open checkpoint '" + path + "'");
  return ReadCheckpoint(in);
}

}  // namespace temarl
