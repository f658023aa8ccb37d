#include "fcvsr/tensor.hpp"

#include <sstream>

namespace fcvsr {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

int64_t Tensor::numel_of(const std::vector<int>& s) {
  int64_t n = 1;
  for (int d : s) {
    FCVSR_CHECK(d > 0, "tensor dims must be positive, got " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

}  // namespace fcvsr
