#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace detkey::gf2 {

/// Finite binary word b_1..b_len over GF(2), b_1 being the top bit level
/// (the first bit after the binary point in the expansion 0.b_1 b_2 b_3 ...).
///
/// Level i is stored at bit position i-1 of the packed words, so truncation
/// to the top m levels is a plain mask and the Toeplitz products below are
/// carryless polynomial products with b_1 as the constant coefficient.
///
/// A default-constructed BitVec has length 0 and acts as the explicit
/// empty-key sentinel; matrix-building operations require length >= 1.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(int len);

  /// b_1 first: from_bits({1,0,1}) is the word 0.101.
  static BitVec from_bits(std::initializer_list<int> bits);
  static BitVec from_string(std::string_view s);  // "101", b_1 first
  static BitVec e1(int len);                      // basis word [1,0,...,0]

  int size() const { return len_; }
  bool empty() const { return len_ == 0; }

  /// Level index is 0-based: bit(0) is b_1, the most significant level.
  int bit(int i) const;
  void set_bit(int i, int v);
  bool leading_one() const { return len_ > 0 && bit(0) == 1; }

  /// Levels [first, first+count), 0-based.
  BitVec subrange(int first, int count) const;
  BitVec concat(const BitVec& tail) const;

  std::string to_string() const;  // "101", b_1 first

  /// "len:hex" with b_1..b_len read MSB-first and zero-padded to whole
  /// nibbles, e.g. [1,0,1,1,0] -> "5:16". Empty word -> "0:0".
  std::string to_hex() const;
  static BitVec from_hex(std::string_view s);

  friend bool operator==(const BitVec& a, const BitVec& b) = default;
  bool operator<(const BitVec& o) const;

  const std::vector<std::uint64_t>& words() const { return w_; }

 private:
  void mask_tail();

  int len_ = 0;
  std::vector<std::uint64_t> w_;  // ceil(len/64) words, level i at word i/64 bit i%64
};

/// Square lower-triangular Toeplitz matrix over GF(2), held by its first
/// column only: entry (i,j) = first_col[i-j] for i >= j (0-based), else 0.
/// Invertible iff the leading column bit is 1.
class LtToeplitz {
 public:
  explicit LtToeplitz(BitVec first_col);
  static LtToeplitz identity(int dim);

  int dim() const { return col_.size(); }
  const BitVec& first_col() const { return col_; }
  bool invertible() const { return col_.leading_one(); }

  friend bool operator==(const LtToeplitz& a, const LtToeplitz& b) = default;

 private:
  BitVec col_;
};

/// T_lt: vector -> its lower-triangular Toeplitz matrix.
LtToeplitz t_lt(const BitVec& x);

/// T_lt^-1(X) = X e_1 = first column.
BitVec t_lt_inv(const LtToeplitz& x);

/// Matrix-vector product over GF(2); requires x.dim() == y.size().
/// Equals the GF(2) polynomial product of first_col and y truncated to
/// y.size() coefficients.
BitVec mat_vec(const LtToeplitz& x, const BitVec& y);

/// Product of two equal-dimension lower-triangular Toeplitz matrices;
/// again lower-triangular Toeplitz, so only the first column is formed.
LtToeplitz mat_mat(const LtToeplitz& x, const LtToeplitz& y);

/// Top m levels b_1..b_m; requires 1 <= m <= x.size().
BitVec truncate(const BitVec& x, int m);

/// Inverse matrix via series inversion of the first column mod z^dim.
/// Requires a unit diagonal (leading column bit 1).
LtToeplitz invert(const LtToeplitz& x);

}  // namespace detkey::gf2
