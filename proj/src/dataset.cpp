#include "tmag/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tmag/error.hpp"
#include "tmag/rng.hpp"

namespace tmag {
namespace {

std::vector<std::string> split(const std::string& line, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Numeric order for digit-only raw ids, lexicographic otherwise.
bool raw_id_less(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

}  // namespace

Index IdMap::intern(const std::string& raw) {
  auto it = to_dense.find(raw);
  if (it != to_dense.end()) return it->second;
  Index id = static_cast<Index>(to_raw.size());
  to_dense.emplace(raw, id);
  to_raw.push_back(raw);
  return id;
}

IdMap IdMap::subset(const std::vector<Index>& kept) const {
  IdMap out;
  for (Index old_id : kept) out.intern(to_raw[static_cast<std::size_t>(old_id)]);
  return out;
}

void IdMap::save_tsv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write id map: " + path);
  for (std::size_t i = 0; i < to_raw.size(); ++i) f << to_raw[i] << '\t' << i << '\n';
}

IdMap IdMap::load_tsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read id map: " + path);
  IdMap out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto parts = split(line, "\t");
    if (parts.size() != 2) throw DataError("malformed id map line in " + path);
    Index id = out.intern(parts[0]);
    if (id != std::stoll(parts[1])) throw DataError("non-dense id map in " + path);
  }
  return out;
}

ImplicitMatrix ImplicitMatrix::empty(Index M, Index N) {
  ImplicitMatrix m;
  m.M = M;
  m.N = N;
  m.rows.assign(static_cast<std::size_t>(M), {});
  return m;
}

void ImplicitMatrix::add(Index u, Index i) {
  if (u < 0 || u >= M || i < 0 || i >= N) throw DataError("interaction index out of range");
  auto& r = rows[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(r.begin(), r.end(), i);
  if (it == r.end() || *it != i) r.insert(it, i);
}

bool ImplicitMatrix::contains(Index u, Index i) const {
  const auto& r = rows[static_cast<std::size_t>(u)];
  return std::binary_search(r.begin(), r.end(), i);
}

Index ImplicitMatrix::total_positives() const {
  Index n = 0;
  for (const auto& r : rows) n += static_cast<Index>(r.size());
  return n;
}

std::vector<std::pair<Index, Index>> ImplicitMatrix::pairs() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(total_positives()));
  for (Index u = 0; u < M; ++u)
    for (Index i : rows[static_cast<std::size_t>(u)]) out.emplace_back(u, i);
  return out;
}

InteractionLog parse_interactions(const std::string& path, FileFormat format) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open interactions file: " + path);
  const std::string sep = format == FileFormat::kMovielensDat ? "::" : "\t";

  InteractionLog log;
  // Dedup rule: keep the record with the latest timestamp (ties: last seen).
  std::map<std::pair<Index, Index>, Interaction> dedup;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split(line, sep);
    if (parts.size() != 4)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                      std::to_string(parts.size()));
    Interaction rec;
    try {
      rec.user = log.users.intern(parts[0]);
      rec.item = log.items.intern(parts[1]);
      std::size_t used = 0;
      rec.rating = std::stod(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument("trailing junk");
      rec.timestamp = std::stoll(parts[3]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed record '" + line + "'");
    }
    if (rec.rating < 1.0 || rec.rating > 5.0)
      throw DataError(path + ":" + std::to_string(lineno) + ": rating out of [1,5]");
    auto key = std::make_pair(rec.user, rec.item);
    auto it = dedup.find(key);
    if (it == dedup.end() || rec.timestamp >= it->second.timestamp) dedup[key] = rec;
  }
  if (dedup.empty()) throw DataError(path + ": no interaction records");
  log.records.reserve(dedup.size());
  for (const auto& [key, rec] : dedup) log.records.push_back(rec);
  return log;
}

ImplicitMatrix binarize(const InteractionLog& log, double threshold) {
  if (threshold < 1.0 || threshold > 5.0) throw UsageError("binarize threshold must be in [1,5]");
  ImplicitMatrix m = ImplicitMatrix::empty(log.num_users(), log.num_items());
  for (const auto& rec : log.records)
    if (rec.rating > threshold) m.add(rec.user, rec.item);
  return m;
}

FilterResult filter_users(const ImplicitMatrix& m, Index min_inter, Index max_inter) {
  if (min_inter > max_inter) throw UsageError("filter_users: min_inter > max_inter");
  FilterResult out;
  for (Index u = 0; u < m.M; ++u) {
    Index deg = m.degree(u);
    if (deg >= min_inter && deg <= max_inter) out.kept_users.push_back(u);
  }
  if (out.kept_users.empty()) throw DataError("filter_users removed every user");
  out.matrix = ImplicitMatrix::empty(static_cast<Index>(out.kept_users.size()), m.N);
  for (std::size_t nu = 0; nu < out.kept_users.size(); ++nu)
    out.matrix.rows[nu] = m.rows[static_cast<std::size_t>(out.kept_users[nu])];
  return out;
}

InteractionLog filter_log_users(const InteractionLog& log, const std::vector<Index>& kept_users) {
  std::unordered_map<Index, Index> remap;
  for (std::size_t nu = 0; nu < kept_users.size(); ++nu)
    remap.emplace(kept_users[nu], static_cast<Index>(nu));
  InteractionLog out;
  out.users = log.users.subset(kept_users);
  out.items = log.items;
  for (const auto& rec : log.records) {
    auto it = remap.find(rec.user);
    if (it == remap.end()) continue;
    Interaction r = rec;
    r.user = it->second;
    out.records.push_back(r);
  }
  return out;
}

namespace {

// Splits ids into existing (floor(ratio * n), at least keeping 1 new) and new.
void split_ids(std::vector<Index> order, double ratio, IdSet& existing, IdSet& fresh) {
  const Index n = static_cast<Index>(order.size());
  Index n_existing = static_cast<Index>(std::floor(ratio * static_cast<double>(n)));
  if (n_existing >= n) n_existing = n - 1;
  if (n_existing <= 0) throw DataError("cold-start split leaves an empty partition side");
  existing.assign(order.begin(), order.begin() + n_existing);
  fresh.assign(order.begin() + n_existing, order.end());
  std::sort(existing.begin(), existing.end());
  std::sort(fresh.begin(), fresh.end());
}

}  // namespace

ColdStartPartition split_cold_start(
    const InteractionLog& log, const ImplicitMatrix& m, UserSplitRule user_rule,
    ItemSplitRule item_rule, double ratio, std::uint64_t seed, double val_frac,
    const std::optional<std::unordered_map<Index, int>>& item_years) {
  if (ratio <= 0.0 || ratio >= 1.0) throw UsageError("split ratio must be in (0,1)");
  if (m.M < 2 || m.N < 2) throw DataError("too few users or items to split");
  if (log.num_users() != m.M || log.num_items() != m.N)
    throw DataError("split_cold_start: log and matrix id spaces differ");

  ColdStartPartition part;

  // Users: order so that the tail (1 - ratio) becomes the new set.
  std::vector<Index> uorder(static_cast<std::size_t>(m.M));
  for (Index u = 0; u < m.M; ++u) uorder[static_cast<std::size_t>(u)] = u;
  if (user_rule == UserSplitRule::kRandom) {
    RngStream rng = RngStream::keyed(seed, 101);
    rng.shuffle(uorder);
  } else {
    std::vector<std::int64_t> first_ts(static_cast<std::size_t>(m.M), INT64_MAX);
    for (const auto& rec : log.records) {
      auto& t = first_ts[static_cast<std::size_t>(rec.user)];
      t = std::min(t, rec.timestamp);
    }
    // Ties broken by raw user id ascending.
    std::sort(uorder.begin(), uorder.end(), [&](Index a, Index b) {
      auto ta = first_ts[static_cast<std::size_t>(a)];
      auto tb = first_ts[static_cast<std::size_t>(b)];
      if (ta != tb) return ta < tb;
      return raw_id_less(log.users.to_raw[static_cast<std::size_t>(a)],
                         log.users.to_raw[static_cast<std::size_t>(b)]);
    });
  }
  split_ids(std::move(uorder), ratio, part.existing_users, part.new_users);

  // Items.
  std::vector<Index> iorder(static_cast<std::size_t>(m.N));
  for (Index i = 0; i < m.N; ++i) iorder[static_cast<std::size_t>(i)] = i;
  if (item_rule == ItemSplitRule::kRandom) {
    RngStream rng = RngStream::keyed(seed, 102);
    rng.shuffle(iorder);
  } else if (item_rule == ItemSplitRule::kReleaseYear) {
    if (!item_years) throw UsageError("item_rule=release_year requires item year data");
    std::sort(iorder.begin(), iorder.end(), [&](Index a, Index b) {
      auto ya = item_years->count(a) ? item_years->at(a) : INT32_MAX;
      auto yb = item_years->count(b) ? item_years->at(b) : INT32_MAX;
      if (ya != yb) return ya < yb;
      return raw_id_less(log.items.to_raw[static_cast<std::size_t>(a)],
                         log.items.to_raw[static_cast<std::size_t>(b)]);
    });
  } else {
    std::vector<std::int64_t> first_ts(static_cast<std::size_t>(m.N), INT64_MAX);
    for (const auto& rec : log.records) {
      auto& t = first_ts[static_cast<std::size_t>(rec.item)];
      t = std::min(t, rec.timestamp);
    }
    // Items never rated sort to the tail (newest side).
    std::sort(iorder.begin(), iorder.end(), [&](Index a, Index b) {
      auto ta = first_ts[static_cast<std::size_t>(a)];
      auto tb = first_ts[static_cast<std::size_t>(b)];
      if (ta != tb) return ta < tb;
      return raw_id_less(log.items.to_raw[static_cast<std::size_t>(a)],
                         log.items.to_raw[static_cast<std::size_t>(b)]);
    });
  }
  split_ids(std::move(iorder), ratio, part.existing_items, part.new_items);

  // Validation users: a seeded sample of existing users.
  if (val_frac > 0.0) {
    std::vector<Index> pool = part.existing_users;
    RngStream rng = RngStream::keyed(seed, 103);
    rng.shuffle(pool);
    Index n_val = static_cast<Index>(std::floor(val_frac * static_cast<double>(pool.size())));
    part.val_users.assign(pool.begin(), pool.begin() + n_val);
    std::sort(part.val_users.begin(), part.val_users.end());
  }

  // Task matrices are the 2x2 cross products; global id space everywhere.
  std::vector<char> user_is_new(static_cast<std::size_t>(m.M), 0);
  std::vector<char> item_is_new(static_cast<std::size_t>(m.N), 0);
  for (Index u : part.new_users) user_is_new[static_cast<std::size_t>(u)] = 1;
  for (Index i : part.new_items) item_is_new[static_cast<std::size_t>(i)] = 1;
  part.meta_train = ImplicitMatrix::empty(m.M, m.N);
  part.task1 = ImplicitMatrix::empty(m.M, m.N);
  part.task2 = ImplicitMatrix::empty(m.M, m.N);
  part.task3 = ImplicitMatrix::empty(m.M, m.N);
  for (Index u = 0; u < m.M; ++u) {
    for (Index i : m.row(u)) {
      bool un = user_is_new[static_cast<std::size_t>(u)];
      bool in = item_is_new[static_cast<std::size_t>(i)];
      ImplicitMatrix& dst = un ? (in ? part.task3 : part.task1) : (in ? part.task2 : part.meta_train);
      dst.rows[static_cast<std::size_t>(u)].push_back(i);
    }
  }
  return part;
}

SupportQuerySplit build_support_query(const ImplicitMatrix& m, const IdSet& users,
                                      Index query_size, std::uint64_t seed) {
  SupportQuerySplit out;
  out.support = ImplicitMatrix::empty(m.M, m.N);
  out.query = ImplicitMatrix::empty(m.M, m.N);
  std::vector<Index> offenders;
  for (Index u : users)
    if (m.degree(u) <= query_size) offenders.push_back(u);
  if (!offenders.empty()) {
    std::string msg = "users with <= query_size positives:";
    for (std::size_t i = 0; i < offenders.size() && i < 20; ++i)
      msg += " " + std::to_string(offenders[i]);
    if (offenders.size() > 20) msg += " ... (" + std::to_string(offenders.size()) + " total)";
    throw DataError(msg);
  }
  for (Index u : users) {
    std::vector<Index> items = m.row(u);
    RngStream rng = RngStream::keyed(seed, 201, static_cast<std::uint64_t>(u));
    rng.shuffle(items);
    auto& q = out.query.rows[static_cast<std::size_t>(u)];
    auto& s = out.support.rows[static_cast<std::size_t>(u)];
    q.assign(items.begin(), items.begin() + query_size);
    s.assign(items.begin() + query_size, items.end());
    std::sort(q.begin(), q.end());
    std::sort(s.begin(), s.end());
  }
  return out;
}

Index AttributeSchema::total_width() const {
  Index w = 0;
  for (const auto& f : fields) w += f.width();
  return w;
}

Index AttributeSchema::field_offset(Index f) const {
  Index off = 0;
  for (Index k = 0; k < f; ++k) off += fields[static_cast<std::size_t>(k)].width();
  return off;
}

namespace {

// Lines look like: entity_id<TAB>field:value[,value...]<TAB>...
void for_each_attr_line(
    const std::string& path,
    const std::function<void(std::size_t, const std::string&,
                             const std::vector<std::pair<std::string, std::vector<std::string>>>&)>& fn) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open attributes file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, "\t");
    if (cols.size() < 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected entity and fields");
    std::vector<std::pair<std::string, std::vector<std::string>>> fields;
    for (std::size_t c = 1; c < cols.size(); ++c) {
      if (cols[c].empty()) continue;
      std::size_t colon = cols[c].find(':');
      if (colon == std::string::npos)
        throw DataError(path + ":" + std::to_string(lineno) + ": field missing ':' separator");
      fields.emplace_back(cols[c].substr(0, colon), split(cols[c].substr(colon + 1), ","));
    }
    fn(lineno, cols[0], fields);
  }
}

}  // namespace

AttributeSchema AttributeSchema::build_from_file(const std::string& path) {
  AttributeSchema schema;
  for_each_attr_line(path, [&](std::size_t, const std::string&, const auto& fields) {
    for (const auto& [name, values] : fields) {
      auto it = schema.field_ids.find(name);
      Index fid;
      if (it == schema.field_ids.end()) {
        fid = static_cast<Index>(schema.fields.size());
        schema.field_ids.emplace(name, fid);
        schema.fields.push_back(AttributeField{name, {}, {}});
      } else {
        fid = it->second;
      }
      auto& field = schema.fields[static_cast<std::size_t>(fid)];
      for (const auto& v : values) {
        if (v.empty()) continue;
        if (!field.value_ids.count(v)) {
          field.value_ids.emplace(v, static_cast<Index>(field.vocab.size()));
          field.vocab.push_back(v);
        }
      }
    }
  });
  return schema;
}

AttributeTable encode_attributes(const AttributeSchema& schema, const std::string& path,
                                 const IdMap& ids) {
  AttributeTable table;
  table.width = schema.total_width();
  table.entries.assign(static_cast<std::size_t>(ids.size()), {});
  std::vector<Index> offsets(schema.fields.size());
  for (std::size_t f = 0; f < schema.fields.size(); ++f)
    offsets[f] = schema.field_offset(static_cast<Index>(f));

  for_each_attr_line(path, [&](std::size_t lineno, const std::string& raw_id, const auto& fields) {
    auto it = ids.to_dense.find(raw_id);
    if (it == ids.to_dense.end()) return;  // entity not in the interaction universe
    auto& bits = table.entries[static_cast<std::size_t>(it->second)];
    for (const auto& [name, values] : fields) {
      auto fit = schema.field_ids.find(name);
      if (fit == schema.field_ids.end())
        throw DataError(path + ":" + std::to_string(lineno) + ": unknown field '" + name + "'");
      const auto& field = schema.fields[static_cast<std::size_t>(fit->second)];
      const Index off = offsets[static_cast<std::size_t>(fit->second)];
      for (const auto& v : values) {
        if (v.empty()) continue;
        auto vit = field.value_ids.find(v);
        bits.push_back(off + (vit == field.value_ids.end() ? field.unk_slot() : vit->second));
      }
    }
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
  });
  return table;
}

}  // namespace tmag
