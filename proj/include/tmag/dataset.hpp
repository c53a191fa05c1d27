#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmag/types.hpp"

namespace tmag {

// Raw-id <-> dense-id mapping persisted alongside every ingested dataset.
struct IdMap {
  std::unordered_map<std::string, Index> to_dense;
  std::vector<std::string> to_raw;

  Index intern(const std::string& raw);
  Index size() const { return static_cast<Index>(to_raw.size()); }
  // Restrict to a subset of dense ids (ascending); re-densifies.
  IdMap subset(const std::vector<Index>& kept) const;

  void save_tsv(const std::string& path) const;
  static IdMap load_tsv(const std::string& path);
};

struct Interaction {
  Index user = 0;
  Index item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

struct InteractionLog {
  std::vector<Interaction> records;  // deduplicated, sorted by (user, item)
  IdMap users;
  IdMap items;

  Index num_users() const { return users.size(); }
  Index num_items() const { return items.size(); }
};

// Sparse binary interaction matrix. rows[u] holds u's positive items, sorted.
struct ImplicitMatrix {
  Index M = 0;
  Index N = 0;
  std::vector<std::vector<Index>> rows;

  static ImplicitMatrix empty(Index M, Index N);
  void add(Index u, Index i);  // keeps rows sorted/unique
  bool contains(Index u, Index i) const;
  Index degree(Index u) const { return static_cast<Index>(rows[static_cast<std::size_t>(u)].size()); }
  const std::vector<Index>& row(Index u) const { return rows[static_cast<std::size_t>(u)]; }
  Index total_positives() const;
  std::vector<std::pair<Index, Index>> pairs() const;
};

struct ColdStartPartition {
  IdSet existing_users, new_users;
  IdSet existing_items, new_items;
  IdSet val_users;  // held-out slice of existing_users for early stopping
  ImplicitMatrix meta_train;  // existing x existing
  ImplicitMatrix task1;       // new users x existing items
  ImplicitMatrix task2;       // existing users x new items
  ImplicitMatrix task3;       // new users x new items
};

enum class FileFormat { kTsv, kMovielensDat };
enum class UserSplitRule { kRandom, kFirstRatingTime };
enum class ItemSplitRule { kRandom, kReleaseYear, kFirstRatedTime };

// One categorical field with a frozen vocabulary. Slot layout within the
// field segment: [vocab values..., UNK]; width = vocab size + 1.
struct AttributeField {
  std::string name;
  std::vector<std::string> vocab;                    // insertion order
  std::unordered_map<std::string, Index> value_ids;  // value -> slot

  Index width() const { return static_cast<Index>(vocab.size()) + 1; }
  Index unk_slot() const { return static_cast<Index>(vocab.size()); }
};

struct AttributeSchema {
  std::vector<AttributeField> fields;
  std::unordered_map<std::string, Index> field_ids;

  Index total_width() const;
  Index field_offset(Index f) const;
  // Scan a raw attribute file and freeze vocabularies from observed values.
  static AttributeSchema build_from_file(const std::string& path);
};

// Multi-hot vectors stored as sorted set-bit indices into the schema width.
struct AttributeTable {
  Index width = 0;
  std::vector<std::vector<Index>> entries;  // per dense entity id

  const std::vector<Index>& bits(Index e) const { return entries[static_cast<std::size_t>(e)]; }
  Index count() const { return static_cast<Index>(entries.size()); }
};

struct FilterResult {
  ImplicitMatrix matrix;
  std::vector<Index> kept_users;  // old dense id per new dense id, ascending
};

struct SupportQuerySplit {
  ImplicitMatrix support;
  ImplicitMatrix query;
};

InteractionLog parse_interactions(const std::string& path, FileFormat format);

ImplicitMatrix binarize(const InteractionLog& log, double threshold = 3.0);

FilterResult filter_users(const ImplicitMatrix& m, Index min_inter = 13, Index max_inter = 100);

// Restrict a log to the kept users (old dense ids, ascending) and re-densify.
InteractionLog filter_log_users(const InteractionLog& log, const std::vector<Index>& kept_users);

ColdStartPartition split_cold_start(
    const InteractionLog& log, const ImplicitMatrix& m, UserSplitRule user_rule,
    ItemSplitRule item_rule, double ratio, std::uint64_t seed, double val_frac = 0.1,
    const std::optional<std::unordered_map<Index, int>>& item_years = std::nullopt);

SupportQuerySplit build_support_query(const ImplicitMatrix& m, const IdSet& users,
                                      Index query_size, std::uint64_t seed);

AttributeTable encode_attributes(const AttributeSchema& schema, const std::string& path,
                                 const IdMap& ids);

}  // namespace tmag
