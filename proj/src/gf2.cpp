#include "detkey/gf2.hpp"

#include <algorithm>
#include <stdexcept>

namespace detkey::gf2 {

namespace {

int word_count(int len) { return (len + 63) / 64; }

// dst ^= src << k (shift toward higher level indices), dst sized for the
// output length; source bits shifted past the end are dropped by mask_tail.
void xor_shifted(std::vector<std::uint64_t>& dst,
                 const std::vector<std::uint64_t>& src, int k) {
  const int ws = k / 64;
  const int bs = k % 64;
  const int n = static_cast<int>(dst.size());
  for (int w = n - 1; w >= ws; --w) {
    const int s = w - ws;
    std::uint64_t v = 0;
    if (s < static_cast<int>(src.size())) v = src[s] << bs;
    if (bs != 0 && s - 1 >= 0 && s - 1 < static_cast<int>(src.size()))
      v |= src[s - 1] >> (64 - bs);
    dst[w] ^= v;
  }
}

}  // namespace

BitVec::BitVec(int len) {
  if (len < 0) throw std::invalid_argument("BitVec: negative length");
  len_ = len;
  w_.assign(word_count(len), 0);
}

BitVec BitVec::from_bits(std::initializer_list<int> bits) {
  BitVec v(static_cast<int>(bits.size()));
  int i = 0;
  for (int b : bits) v.set_bit(i++, b);
  return v;
}

BitVec BitVec::from_string(std::string_view s) {
  BitVec v(static_cast<int>(s.size()));
  for (int i = 0; i < v.len_; ++i) {
    if (s[i] != '0' && s[i] != '1')
      throw std::invalid_argument("BitVec: bad character in bit string");
    v.set_bit(i, s[i] - '0');
  }
  return v;
}

BitVec BitVec::e1(int len) {
  if (len < 1) throw std::invalid_argument("BitVec::e1: length must be >= 1");
  BitVec v(len);
  v.set_bit(0, 1);
  return v;
}

int BitVec::bit(int i) const {
  if (i < 0 || i >= len_) throw std::out_of_range("BitVec::bit: index out of range");
  return static_cast<int>((w_[i >> 6] >> (i & 63)) & 1u);
}

void BitVec::set_bit(int i, int v) {
  if (i < 0 || i >= len_) throw std::out_of_range("BitVec::set_bit: index out of range");
  if (v != 0 && v != 1) throw std::invalid_argument("BitVec::set_bit: bit must be 0 or 1");
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (v)
    w_[i >> 6] |= mask;
  else
    w_[i >> 6] &= ~mask;
}

BitVec BitVec::subrange(int first, int count) const {
  if (count < 0 || first < 0 || first + count > len_)
    throw std::out_of_range("BitVec::subrange: range out of bounds");
  BitVec r(count);
  for (int i = 0; i < count; ++i) r.set_bit(i, bit(first + i));
  return r;
}

BitVec BitVec::concat(const BitVec& tail) const {
  BitVec r(len_ + tail.len_);
  for (int i = 0; i < len_; ++i) r.set_bit(i, bit(i));
  for (int i = 0; i < tail.len_; ++i) r.set_bit(len_ + i, tail.bit(i));
  return r;
}

std::string BitVec::to_string() const {
  std::string s(static_cast<size_t>(len_), '0');
  for (int i = 0; i < len_; ++i) s[i] = static_cast<char>('0' + bit(i));
  return s;
}

std::string BitVec::to_hex() const {
  if (len_ == 0) return "0:0";
  const int nibbles = (len_ + 3) / 4;
  std::string bin(static_cast<size_t>(nibbles * 4 - len_), '0');
  bin += to_string();
  std::string hex;
  hex.reserve(static_cast<size_t>(nibbles));
  static const char* digits = "0123456789abcdef";
  for (int d = 0; d < nibbles; ++d) {
    int v = 0;
    for (int j = 0; j < 4; ++j) v = (v << 1) | (bin[4 * d + j] - '0');
    hex += digits[v];
  }
  return std::to_string(len_) + ":" + hex;
}

BitVec BitVec::from_hex(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("BitVec::from_hex: missing ':'");
  int len = 0;
  for (char c : s.substr(0, colon)) {
    if (c < '0' || c > '9') throw std::invalid_argument("BitVec::from_hex: bad length");
    len = len * 10 + (c - '0');
    if (len > (1 << 20)) throw std::invalid_argument("BitVec::from_hex: length too large");
  }
  const std::string_view hex = s.substr(colon + 1);
  if (len == 0) {
    if (hex != "0") throw std::invalid_argument("BitVec::from_hex: bad empty word");
    return BitVec();
  }
  const int nibbles = (len + 3) / 4;
  if (static_cast<int>(hex.size()) != nibbles)
    throw std::invalid_argument("BitVec::from_hex: wrong digit count");
  std::string bin;
  bin.reserve(static_cast<size_t>(nibbles) * 4);
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      v = c - 'A' + 10;
    else
      throw std::invalid_argument("BitVec::from_hex: bad hex digit");
    for (int j = 3; j >= 0; --j) bin += static_cast<char>('0' + ((v >> j) & 1));
  }
  const int pad = nibbles * 4 - len;
  for (int i = 0; i < pad; ++i)
    if (bin[i] != '0') throw std::invalid_argument("BitVec::from_hex: padding bits set");
  return from_string(std::string_view(bin).substr(static_cast<size_t>(pad)));
}

bool BitVec::operator<(const BitVec& o) const {
  if (len_ != o.len_) return len_ < o.len_;
  for (int w = static_cast<int>(w_.size()) - 1; w >= 0; --w)
    if (w_[w] != o.w_[w]) return w_[w] < o.w_[w];
  return false;
}

void BitVec::mask_tail() {
  if (len_ % 64 != 0 && !w_.empty())
    w_.back() &= (std::uint64_t{1} << (len_ % 64)) - 1;
}

LtToeplitz::LtToeplitz(BitVec first_col) : col_(std::move(first_col)) {
  if (col_.empty())
    throw std::invalid_argument("LtToeplitz: dimension must be >= 1");
}

LtToeplitz LtToeplitz::identity(int dim) { return LtToeplitz(BitVec::e1(dim)); }

LtToeplitz t_lt(const BitVec& x) { return LtToeplitz(x); }

BitVec t_lt_inv(const LtToeplitz& x) { return x.first_col(); }

BitVec mat_vec(const LtToeplitz& x, const BitVec& y) {
  if (x.dim() != y.size())
    throw std::invalid_argument("mat_vec: dimension mismatch");
  const BitVec& c = x.first_col();
  std::vector<std::uint64_t> acc(y.words().size(), 0);
  for (int i = 0; i < c.size(); ++i)
    if (c.bit(i)) xor_shifted(acc, y.words(), i);
  BitVec out(y.size());
  for (int i = 0; i < y.size(); ++i)
    out.set_bit(i, static_cast<int>((acc[i >> 6] >> (i & 63)) & 1u));
  return out;
}

LtToeplitz mat_mat(const LtToeplitz& x, const LtToeplitz& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("mat_mat: dimension mismatch");
  return LtToeplitz(mat_vec(x, y.first_col()));
}

BitVec truncate(const BitVec& x, int m) {
  if (m < 1) throw std::invalid_argument("truncate: m must be >= 1");
  if (m > x.size()) throw std::invalid_argument("truncate: m exceeds length");
  return x.subrange(0, m);
}

LtToeplitz invert(const LtToeplitz& x) {
  if (!x.invertible())
    throw std::domain_error("invert: singular matrix (leading bit is 0)");
  const BitVec& c = x.first_col();
  const int n = c.size();
  BitVec d(n);
  d.set_bit(0, 1);
  // back-substitution: coefficient j of c*d must vanish for j >= 1
  for (int j = 1; j < n; ++j) {
    int s = 0;
    for (int i = 1; i <= j; ++i) s ^= c.bit(i) & d.bit(j - i);
    d.set_bit(j, s);
  }
  return LtToeplitz(d);
}

}  // namespace detkey::gf2
