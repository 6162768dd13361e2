#ifndef TEMARL_CHECKPOINT_H_
#define TEMARL_CHECKPOINT_H_

#include <iosfwd>
#include <map>
#include <string>

#include "temarl/autodiff.h"

namespace temarl {

class DenseNet;

// Named arrays plus string metadata. Serialized as UTF-8 text:
//
//   temarl-checkpoint 1
//   meta <key> <value...>
//   array <name> <rows> <cols>
//   <rows*cols hexfloat values, row-major, whitespace separated>
//
// Values are written as C99 hexadecimal floats, so a save/load cycle
// reproduces every bit.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, Matrix> arrays;

  void put_net(const std::string& prefix, const DenseNet& net);
  // Overwrites `net`'s parameters; shapes must match exactly.
  void get_net(const std::string& prefix, DenseNet& net) const;
  bool has_net(const std::string& prefix) const;
  const std::string& meta_at(const std::string& key) const;
};

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace temarl

#endif  // TEMARL_CHECKPOINT_H_
