/*
 * Copyright 2026 The DBAFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Hash-chained ledger of model digests with a hash-elected committee leader.

#pragma once

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dbafl/errors.hpp"
#include "dbafl/model.hpp"

namespace dbafl {

using Digest = std::array<std::uint8_t, 32>;
using NodeId = std::uint32_t;

inline Digest hash_bytes(std::span<const std::uint8_t> payload) {
  Digest out{};
  SHA256(payload.data(), payload.size(), out.data());
  return out;
}

inline Digest hash_bytes(std::string_view text) {
  return hash_bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto v = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    v = static_cast<U>(v >> 8);
  }
}

inline char hex_digit(unsigned v) { return "0123456789abcdef"[v & 0xF]; }

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace detail

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(detail::hex_digit(b >> 4));
    s.push_back(detail::hex_digit(b));
  }
  return s;
}

inline std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw FormatError("odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = detail::hex_value(hex[2 * i]);
    const int lo = detail::hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw FormatError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

inline Digest digest_from_hex(std::string_view hex) {
  if (hex.size() != 64) throw FormatError("digest must be 64 hex digits");
  const auto bytes = from_hex(hex);
  Digest d{};
  std::copy(bytes.begin(), bytes.end(), d.begin());
  return d;
}

// Little-endian IEEE-754 bit patterns of every value.
inline std::vector<std::uint8_t> serialize_model(const ModelParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(params.size() * 8);
  for (double v : params.values) detail::put_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline Digest hash_model(const ModelParams& params) {
  if (!all_finite(params)) throw ContractError("hash_model: non-finite parameter");
  return hash_bytes(serialize_model(params));
}

enum class RecordKind : std::uint8_t { kLocalModelHash = 0, kGlobalModelHash = 1 };

struct HashRecord {
  RecordKind kind = RecordKind::kLocalModelHash;
  NodeId node_id = 0;
  std::uint64_t round = 0;
  Digest digest{};

  static constexpr std::size_t kSerializedBytes = 1 + 4 + 8 + 32;
  bool operator==(const HashRecord&) const = default;
};

struct Block {
  std::uint64_t index = 0;
  Digest prev_hash{};
  std::vector<HashRecord> records;
  std::uint64_t timestamp_ms = 0;
  Digest block_hash{};

  bool operator==(const Block&) const = default;
};

// Canonical layout: index u64 | prev_hash[32] | count u32 | records | timestamp u64,
// integers little-endian; a record is kind u8 | node u32 | round u64 | digest[32].
inline std::vector<std::uint8_t> serialize_block_content(
    std::uint64_t index, const Digest& prev_hash, std::span<const HashRecord> records,
    std::uint64_t timestamp_ms) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 32 + 4 + records.size() * HashRecord::kSerializedBytes + 8);
  detail::put_le(out, index);
  out.insert(out.end(), prev_hash.begin(), prev_hash.end());
  detail::put_le(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    out.push_back(static_cast<std::uint8_t>(r.kind));
    detail::put_le(out, r.node_id);
    detail::put_le(out, r.round);
    out.insert(out.end(), r.digest.begin(), r.digest.end());
  }
  detail::put_le(out, timestamp_ms);
  return out;
}

constexpr std::size_t block_serialized_size(std::size_t record_count) {
  return 8 + 32 + 4 + record_count * HashRecord::kSerializedBytes + 8;
}

inline Digest compute_block_hash(const Block& b) {
  return hash_bytes(serialize_block_content(b.index, b.prev_hash, b.records, b.timestamp_ms));
}

struct BlockCutPolicy {
  double max_wait_s = 2.0;
  std::size_t max_records = 10;
  std::size_t max_block_bytes = 10 * 1024 * 1024;

  void validate() const {
    if (!(max_wait_s > 0.0)) throw ConfigError("chain.max_wait_s", "must be > 0");
    if (max_records == 0) throw ConfigError("chain.max_records", "must be > 0");
    if (max_block_bytes == 0) throw ConfigError("chain.max_block_bytes", "must be > 0");
  }
  bool operator==(const BlockCutPolicy&) const = default;
};

inline bool should_cut_block(std::size_t pending_records, std::size_t pending_bytes,
                             double elapsed_since_first_s, const BlockCutPolicy& policy) {
  return pending_records >= policy.max_records || pending_bytes >= policy.max_block_bytes ||
         (pending_records >= 1 && elapsed_since_first_s >= policy.max_wait_s);
}

// Digest read as a big-endian unsigned integer, reduced mod M.
inline std::size_t elect_leader(const Digest& block_hash, std::size_t M) {
  if (M == 0) throw ContractError("elect_leader: committee is empty");
  __extension__ typedef unsigned __int128 wide;
  wide r = 0;
  for (auto b : block_hash) r = (r * 256 + b) % M;
  return static_cast<std::size_t>(r);
}

inline std::vector<double> leader_probabilities(std::span<const std::size_t> observed,
                                                std::size_t M) {
  if (observed.empty()) throw ContractError("leader_probabilities: no observations");
  if (M == 0) throw ContractError("leader_probabilities: M must be >= 1");
  std::vector<double> counts(M, 0.0);
  for (auto id : observed) {
    if (id >= M) throw ContractError("leader_probabilities: identity out of range");
    counts[id] += 1.0;
  }
  const double n = static_cast<double>(observed.size());
  for (auto& c : counts) c /= n;
  return counts;
}

// Gini coefficient: sum_m sum_j |p_m - p_j| / (2 sum_m sum_j p_j).
inline double gini(std::span<const double> p) {
  if (p.empty()) throw ContractError("gini: empty vector");
  double num = 0.0;
  double den = 0.0;
  for (double pm : p) {
    if (!(pm >= 0.0)) throw ContractError("gini: negative entry");
    for (double pj : p) {
      num += std::abs(pm - pj);
      den += pj;
    }
  }
  if (!(den > 0.0)) throw ContractError("gini: entries sum to zero");
  return num / (2.0 * den);
}

struct CommitteeState {
  std::vector<NodeId> members;     // RSU identities, configuration order
  NodeId leader = 0;
  std::size_t term_blocks = 10;
  std::size_t blocks_in_term = 0;
  std::set<NodeId> blacklist;
  std::size_t term_index = 0;
  std::vector<NodeId> leader_history;  // leader of each term
  bool pinned = false;                 // leader never rotates

  bool is_member(NodeId id) const {
    return std::find(members.begin(), members.end(), id) != members.end();
  }
};

enum class VerifyResult { kValid, kTamperedAndBlacklisted };

class Blockchain {
 public:
  // Builds the genesis block and elects the first leader from its hash.
  Blockchain(std::vector<NodeId> members, std::size_t term_blocks, BlockCutPolicy policy,
             std::vector<HashRecord> genesis_records, std::uint64_t genesis_timestamp_ms,
             std::optional<NodeId> pinned_leader = std::nullopt)
      : policy_(policy) {
    if (members.empty()) throw ConfigError("nodes", "committee needs at least one RSU");
    if (term_blocks == 0) throw ConfigError("chain.term_blocks", "must be >= 1");
    policy_.validate();
    committee_.members = std::move(members);
    committee_.term_blocks = term_blocks;
    if (pinned_leader) {
      if (!committee_.is_member(*pinned_leader))
        throw ConfigError("nodes", "pinned leader is not a committee member");
      committee_.pinned = true;
      committee_.leader = *pinned_leader;
    }
    Block g;
    g.index = 0;
    g.records = std::move(genesis_records);
    g.timestamp_ms = genesis_timestamp_ms;
    g.block_hash = compute_block_hash(g);
    blocks_.push_back(std::move(g));
    elect_from(blocks_.back());
  }

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const Block& head() const noexcept { return blocks_.back(); }
  const CommitteeState& committee() const noexcept { return committee_; }
  CommitteeState& committee() noexcept { return committee_; }
  const BlockCutPolicy& policy() const noexcept { return policy_; }
  std::size_t elections() const noexcept { return elections_; }

  const Block& append_block(std::vector<HashRecord> records, std::uint64_t timestamp_ms) {
    if (records.empty()) throw ContractError("append_block: no records");
    if (block_serialized_size(records.size()) > policy_.max_block_bytes)
      throw PolicyError("append_block: block exceeds max_block_bytes");
    Block b;
    b.index = head().index + 1;
    b.prev_hash = head().block_hash;
    b.records = std::move(records);
    b.timestamp_ms = timestamp_ms;
    b.block_hash = compute_block_hash(b);
    blocks_.push_back(std::move(b));
    if (++committee_.blocks_in_term == committee_.term_blocks) {
      committee_.blocks_in_term = 0;
      ++committee_.term_index;
      elect_from(blocks_.back());
    }
    return blocks_.back();
  }

  // Pending pool: records submitted but not yet sealed into a block.
  void submit(const HashRecord& record, double now_s) {
    if (pending_.empty()) first_pending_s_ = now_s;
    pending_.push_back(record);
  }
  const std::vector<HashRecord>& pending() const noexcept { return pending_; }
  double first_pending_s() const noexcept { return first_pending_s_; }

  bool should_cut(double now_s) const {
    return should_cut_block(pending_.size(), pending_.size() * HashRecord::kSerializedBytes,
                            pending_.empty() ? 0.0 : now_s - first_pending_s_, policy_);
  }

  // Seals up to max_records pending records into a block; returns it.
  const Block& cut(double now_s) {
    if (pending_.empty()) throw ContractError("cut: nothing pending");
    const auto take = std::min(pending_.size(), policy_.max_records);
    std::vector<HashRecord> recs(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(take));
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(take));
    first_pending_s_ = now_s;
    return append_block(std::move(recs), to_ms(now_s));
  }

  // Searches sealed blocks, then the pending pool.
  std::optional<HashRecord> find_record(RecordKind kind, NodeId node, std::uint64_t round) const {
    auto match = [&](const HashRecord& r) {
      return r.kind == kind && r.node_id == node && r.round == round;
    };
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
      auto f = std::find_if(it->records.begin(), it->records.end(), match);
      if (f != it->records.end()) return *f;
    }
    auto f = std::find_if(pending_.begin(), pending_.end(), match);
    if (f != pending_.end()) return *f;
    return std::nullopt;
  }

  bool contains(const HashRecord& record) const {
    auto r = find_record(record.kind, record.node_id, record.round);
    return r && *r == record;
  }

  bool verify() const;

  static std::uint64_t to_ms(double seconds) {
    return static_cast<std::uint64_t>(std::llround(seconds * 1000.0));
  }

 private:
  void elect_from(const Block& b) {
    ++elections_;
    committee_.blacklist.clear();
    if (!committee_.pinned)
      committee_.leader = committee_.members[elect_leader(b.block_hash, committee_.members.size())];
    committee_.leader_history.push_back(committee_.leader);
  }

  std::vector<Block> blocks_;
  CommitteeState committee_;
  BlockCutPolicy policy_;
  std::vector<HashRecord> pending_;
  double first_pending_s_ = 0.0;
  std::size_t elections_ = 0;
};

struct AuditResult {
  bool ok = true;
  std::uint64_t first_bad_block = 0;

  static AuditResult good() { return {}; }
  static AuditResult bad(std::uint64_t index) { return {false, index}; }
  bool operator==(const AuditResult&) const = default;
};

// Recomputes every block hash and back-link.
inline AuditResult audit_blocks(std::span<const Block> blocks) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const Digest expected_prev = i == 0 ? Digest{} : blocks[i - 1].block_hash;
    if (b.index != i || b.prev_hash != expected_prev || compute_block_hash(b) != b.block_hash)
      return AuditResult::bad(b.index);
  }
  return AuditResult::good();
}

inline bool Blockchain::verify() const { return audit_blocks(blocks_).ok; }

// A model that does not match its on-chain digest gets its sender blacklisted
// for the rest of the current term.
inline VerifyResult verify_record(const Blockchain& chain, const ModelParams& claimed_model,
                                  const HashRecord& record, CommitteeState& committee) {
  if (!chain.contains(record)) throw ContractError("verify_record: record not on chain");
  if (all_finite(claimed_model) && hash_model(claimed_model) == record.digest)
    return VerifyResult::kValid;
  committee.blacklist.insert(record.node_id);
  return VerifyResult::kTamperedAndBlacklisted;
}

// Chain dump: one block per line,
//   <index:16 hex> <timestamp_ms:16 hex> <prev_hash:64 hex> <records> <block_hash:64 hex>
// where <records> is '-' for none or comma-joined 90-hex-digit records
// (kind:2, node:8, round:16, digest:64; integers big-endian in the text).
// A final "end <block count:16 hex>" line makes truncation at a line boundary
// detectable.
namespace detail {

template <typename T>
std::string int_hex(T v) {
  std::string s(sizeof(T) * 2, '0');
  for (std::size_t i = s.size(); i-- > 0;) {
    s[i] = hex_digit(static_cast<unsigned>(v & 0xF));
    v = static_cast<T>(v >> 4);
  }
  return s;
}

template <typename T>
T parse_int_hex(std::string_view s) {
  if (s.size() != sizeof(T) * 2) throw FormatError("bad integer field width");
  T v = 0;
  for (char c : s) {
    const int d = hex_value(c);
    if (d < 0) throw FormatError("invalid hex digit");
    v = static_cast<T>((v << 4) | static_cast<T>(d));
  }
  return v;
}

}  // namespace detail

inline std::string dump_block(const Block& b) {
  std::string line = detail::int_hex(b.index) + ' ' + detail::int_hex(b.timestamp_ms) + ' ' +
                     to_hex(b.prev_hash) + ' ';
  if (b.records.empty()) line += '-';
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    const auto& r = b.records[i];
    if (i) line += ',';
    line += detail::int_hex(static_cast<std::uint8_t>(r.kind));
    line += detail::int_hex(r.node_id);
    line += detail::int_hex(r.round);
    line += to_hex(r.digest);
  }
  line += ' ' + to_hex(b.block_hash);
  return line;
}

inline std::string dump_chain(std::span<const Block> blocks) {
  std::string out;
  for (const auto& b : blocks) out += dump_block(b) + '\n';
  out += "end " + detail::int_hex(static_cast<std::uint64_t>(blocks.size())) + '\n';
  return out;
}

inline Block parse_block_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto sp = line.find(' ', pos);
    const auto end = sp == std::string_view::npos ? line.size() : sp;
    fields.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  if (fields.size() != 5) throw FormatError("block line must have 5 fields");
  Block b;
  b.index = detail::parse_int_hex<std::uint64_t>(fields[0]);
  b.timestamp_ms = detail::parse_int_hex<std::uint64_t>(fields[1]);
  b.prev_hash = digest_from_hex(fields[2]);
  if (fields[3] != "-") {
    std::string_view recs = fields[3];
    std::size_t p = 0;
    while (p <= recs.size()) {
      const auto comma = recs.find(',', p);
      const auto end = comma == std::string_view::npos ? recs.size() : comma;
      const auto r = recs.substr(p, end - p);
      if (r.size() != 90) throw FormatError("record must be 90 hex digits");
      HashRecord rec;
      const auto kind = detail::parse_int_hex<std::uint8_t>(r.substr(0, 2));
      if (kind > static_cast<std::uint8_t>(RecordKind::kGlobalModelHash))
        throw FormatError("unknown record kind");
      rec.kind = static_cast<RecordKind>(kind);
      rec.node_id = detail::parse_int_hex<std::uint32_t>(r.substr(2, 8));
      rec.round = detail::parse_int_hex<std::uint64_t>(r.substr(10, 16));
      rec.digest = digest_from_hex(r.substr(26, 64));
      b.records.push_back(rec);
      p = end + 1;
    }
  }
  b.block_hash = digest_from_hex(fields[4]);
  return b;
}

// Throws FormatError on any malformed line, a missing or wrong end line, or
// an empty dump.
inline std::vector<Block> parse_chain_dump(std::string_view text) {
  std::vector<Block> blocks;
  std::size_t pos = 0;
  bool ended = false;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw FormatError("truncated dump: missing final newline");
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw FormatError("empty line in dump");
    if (ended) throw FormatError("content after end line");
    if (line.starts_with("end ")) {
      if (detail::parse_int_hex<std::uint64_t>(line.substr(4)) != blocks.size())
        throw FormatError("end line block count does not match");
      ended = true;
      continue;
    }
    blocks.push_back(parse_block_line(line));
  }
  if (!ended) throw FormatError("truncated dump: missing end line");
  if (blocks.empty()) throw FormatError("empty dump");
  return blocks;
}

}  // namespace dbafl
