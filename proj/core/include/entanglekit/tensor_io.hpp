#pragma once

#include <iosfwd>
#include <string>

#include "entanglekit/tensor.hpp"

namespace entanglekit {

// Binary dense-tensor container:
//
//   bytes 0..3   magic "LCTN"
//   u32          format version (currently 1)
//   u32          ndim
//   u64 * ndim   axis extents
//   f64 * prod   payload, row-major
//
// All integers and doubles are little-endian.  The stream variants make it
// possible to embed tensors inside other containers (network files do this).

void write_tensor(std::ostream& os, const DenseTensor& a);
DenseTensor read_tensor(std::istream& is, std::size_t budget = kDefaultElementBudget);

void save_tensor(const std::string& path, const DenseTensor& a);
DenseTensor load_tensor(const std::string& path, std::size_t budget = kDefaultElementBudget);

} // namespace entanglekit
