#include "bridgeord/draws_io.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/text.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <unordered_map>

namespace bridgeord {
namespace {

// A default-constructed store has no chains; every other shape goes through
// the validating constructor.
DrawsStore shaped_store(std::vector<std::string> names, int n_chains, int n_retained) {
  if (n_chains == 0 && n_retained == 0 && names.empty()) return DrawsStore{};
  try {
    return DrawsStore(std::move(names), n_chains, n_retained);
  } catch (const ValidationError& e) {
    throw IoError(std::string("draws file has an invalid shape: ") + e.what());
  }
}

constexpr std::string_view kTextMagic = "# bridgeord draws ";
constexpr std::string_view kTextVersion = "1";
constexpr std::string_view kBinaryMagic = "BORDDRW1";
constexpr std::string_view kBinaryEnd = "BORDEND1";

constexpr std::array<const char*, 7> kStatNames = {"accept_stat__", "treedepth__", "n_leapfrog__", "divergent__",
                                                   "stepsize__",    "energy__",    "lp__"};

std::array<double, 7> stat_values(const IterationStats& s) {
  return {s.accept_stat, static_cast<double>(s.tree_depth), static_cast<double>(s.n_leapfrog),
          s.divergent ? 1.0 : 0.0, s.step_size, s.energy, s.log_density};
}

void set_stat(IterationStats& s, std::size_t which, double x) {
  switch (which) {
    case 0: s.accept_stat = x; break;
    case 1: s.tree_depth = static_cast<int>(x); break;
    case 2: s.n_leapfrog = static_cast<int>(x); break;
    case 3: s.divergent = x != 0.0; break;
    case 4: s.step_size = x; break;
    case 5: s.energy = x; break;
    default: s.log_density = x; break;
  }
}

std::string text_form(const DrawsStore& store) {
  std::string out;
  out += kTextMagic;
  out += kTextVersion;
  out += '\n';
  for (const auto& [key, value] : store.attributes()) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw IoError("draws attribute '" + key + "' cannot be written as text");
    }
    out += "# attr " + key + "=" + value + "\n";
  }
  out += "# chains " + std::to_string(store.n_chains()) + "\n";
  out += "# retained " + std::to_string(store.n_retained()) + "\n";
  out += "# names ";
  for (int c = 0; c < store.n_names(); ++c) out += (c ? "," : "") + store.names()[static_cast<std::size_t>(c)];
  out += "\nchain,iter,name,value\n";
  long long rows = 0;
  for (int ch = 0; ch < store.n_chains(); ++ch) {
    const std::string chain_tag = std::to_string(ch + 1) + ",";
    for (int it = 0; it < store.n_retained(); ++it) {
      const std::string prefix = chain_tag + std::to_string(it + 1) + ",";
      for (int c = 0; c < store.n_names(); ++c) {
        out += prefix;
        out += store.names()[static_cast<std::size_t>(c)];
        out += ',';
        out += text::format_double(store.at(ch, it, c));
        out += '\n';
      }
      const auto stats = stat_values(store.stats(ch, it));
      for (std::size_t s = 0; s < kStatNames.size(); ++s) {
        out += prefix;
        out += kStatNames[s];
        out += ',';
        out += text::format_double(stats[s]);
        out += '\n';
      }
      rows += store.n_names() + static_cast<long long>(kStatNames.size());
    }
  }
  out += "# end " + std::to_string(rows) + "\n";
  return out;
}

DrawsStore parse_text(std::string_view bytes) {
  std::size_t pos = 0;
  int line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= bytes.size()) return false;
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& why) -> IoError {
    return IoError("draws file line " + std::to_string(line_no) + ": " + why);
  };

  std::string_view line;
  if (!next_line(line) || !line.starts_with(kTextMagic)) throw IoError("not a draws file (missing header)");
  if (line.substr(kTextMagic.size()) != kTextVersion) {
    throw IoError("unsupported draws file version '" + std::string(line.substr(kTextMagic.size())) + "'");
  }

  std::map<std::string, std::string> attrs;
  int n_chains = -1;
  int n_retained = -1;
  std::vector<std::string> names;
  bool have_names = false;
  while (true) {
    if (!next_line(line)) throw IoError("draws file truncated in header");
    if (line.starts_with("# attr ")) {
      const auto body = line.substr(7);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw fail("malformed attribute");
      attrs[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
    } else if (line.starts_with("# chains ")) {
      n_chains = static_cast<int>(text::parse_int(line.substr(9), "chains"));
    } else if (line.starts_with("# retained ")) {
      n_retained = static_cast<int>(text::parse_int(line.substr(11), "retained"));
    } else if (line.starts_with("# names")) {
      const auto body = text::trim(line.substr(7));
      if (!body.empty()) {
        for (auto n : text::split(body, ',')) names.emplace_back(n);
      }
      have_names = true;
    } else if (line == "chain,iter,name,value") {
      break;
    } else {
      throw fail("unexpected header line");
    }
  }
  if (n_chains < 0 || n_retained < 0 || !have_names) throw IoError("draws header is incomplete");

  DrawsStore store = shaped_store(names, n_chains, n_retained);
  store.attributes() = std::move(attrs);

  std::unordered_map<std::string_view, int> column;
  for (std::size_t c = 0; c < names.size(); ++c) column.emplace(store.names()[c], static_cast<int>(c));
  for (std::size_t s = 0; s < kStatNames.size(); ++s) {
    column.emplace(kStatNames[s], -1 - static_cast<int>(s));
  }
  const long long expected =
      static_cast<long long>(n_chains) * n_retained * static_cast<long long>(names.size() + kStatNames.size());
  std::vector<bool> seen(static_cast<std::size_t>(expected), false);
  long long rows = 0;
  const std::size_t width = names.size() + kStatNames.size();
  while (true) {
    if (!next_line(line)) throw IoError("draws file truncated: missing end marker after " + std::to_string(rows) + " rows");
    if (line.starts_with("# end ")) {
      const long long declared = text::parse_int(line.substr(6), "row count");
      if (declared != rows || rows != expected) {
        throw IoError("draws file corrupt: expected " + std::to_string(expected) + " rows, found " +
                      std::to_string(rows));
      }
      break;
    }
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw fail("expected 4 fields");
    long long ch = 0, it = 0;
    double value = 0.0;
    try {
      ch = text::parse_int(fields[0], "chain");
      it = text::parse_int(fields[1], "iter");
      value = text::parse_double(fields[3], "value");
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    const auto found = column.find(fields[2]);
    if (found == column.end()) throw fail("unknown quantity '" + std::string(fields[2]) + "'");
    if (ch < 1 || ch > n_chains || it < 1 || it > n_retained) throw fail("chain or iteration out of range");
    const int col = found->second;
    const std::size_t slot_col = col >= 0 ? static_cast<std::size_t>(col) : names.size() + static_cast<std::size_t>(-1 - col);
    const std::size_t slot = (static_cast<std::size_t>(ch - 1) * static_cast<std::size_t>(n_retained) +
                              static_cast<std::size_t>(it - 1)) * width + slot_col;
    if (seen[slot]) throw fail("duplicate entry");
    seen[slot] = true;
    if (col >= 0) {
      store.at(static_cast<int>(ch - 1), static_cast<int>(it - 1), col) = value;
    } else {
      set_stat(store.stats(static_cast<int>(ch - 1), static_cast<int>(it - 1)), static_cast<std::size_t>(-1 - col), value);
    }
    ++rows;
  }
  return store;
}

class ByteWriter {
 public:
  void raw(std::string_view s) { out_ += s; }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) out_ += static_cast<char>((x >> (8 * i)) & 0xff);
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void str(std::string_view s) {
    u64(s.size());
    raw(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  std::string_view raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError("binary draws file truncated");
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t u64() {
    const auto s = raw(8);
    std::uint64_t x = 0;
    for (int i = 7; i >= 0; --i) x = (x << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u64();
    if (n > bytes_.size()) throw IoError("binary draws file corrupt (string length)");
    return std::string(raw(static_cast<std::size_t>(n)));
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string binary_form(const DrawsStore& store) {
  ByteWriter w;
  w.raw(kBinaryMagic);
  w.u64(store.attributes().size());
  for (const auto& [key, value] : store.attributes()) {
    w.str(key);
    w.str(value);
  }
  w.u64(static_cast<std::uint64_t>(store.n_chains()));
  w.u64(static_cast<std::uint64_t>(store.n_retained()));
  w.u64(static_cast<std::uint64_t>(store.n_names()));
  for (const auto& n : store.names()) w.str(n);
  for (int ch = 0; ch < store.n_chains(); ++ch) {
    for (int it = 0; it < store.n_retained(); ++it) {
      for (int c = 0; c < store.n_names(); ++c) w.f64(store.at(ch, it, c));
      for (double s : stat_values(store.stats(ch, it))) w.f64(s);
    }
  }
  w.raw(kBinaryEnd);
  return w.take();
}

DrawsStore parse_binary(std::string_view bytes) {
  ByteReader r(bytes);
  r.raw(kBinaryMagic.size());
  std::map<std::string, std::string> attrs;
  const auto n_attrs = r.u64();
  for (std::uint64_t i = 0; i < n_attrs; ++i) {
    auto key = r.str();
    attrs[key] = r.str();
  }
  const auto n_chains = r.u64();
  const auto n_retained = r.u64();
  const auto n_names = r.u64();
  const std::uint64_t limit = bytes.size();
  if (n_chains > limit || n_retained > limit || n_names > limit) throw IoError("binary draws file corrupt (sizes)");
  std::vector<std::string> names;
  for (std::uint64_t i = 0; i < n_names; ++i) names.push_back(r.str());
  if (n_chains * n_retained * (n_names + kStatNames.size()) * 8 > limit) throw IoError("binary draws file truncated");
  DrawsStore store = shaped_store(std::move(names), static_cast<int>(n_chains), static_cast<int>(n_retained));
  store.attributes() = std::move(attrs);
  for (int ch = 0; ch < store.n_chains(); ++ch) {
    for (int it = 0; it < store.n_retained(); ++it) {
      for (int c = 0; c < store.n_names(); ++c) store.at(ch, it, c) = r.f64();
      for (std::size_t s = 0; s < kStatNames.size(); ++s) set_stat(store.stats(ch, it), s, r.f64());
    }
  }
  if (r.raw(kBinaryEnd.size()) != kBinaryEnd) throw IoError("binary draws file corrupt (end marker)");
  if (!r.at_end()) throw IoError("binary draws file has trailing bytes");
  return store;
}

}  // namespace

std::string serialize_draws(const DrawsStore& store, DrawsFormat format) {
  return format == DrawsFormat::binary ? binary_form(store) : text_form(store);
}

DrawsStore deserialize_draws(std::string_view bytes) {
  if (bytes.empty()) throw IoError("draws file is empty");
  if (bytes.starts_with(kBinaryMagic)) return parse_binary(bytes);
  if (bytes.starts_with("BORDDRW")) throw IoError("unsupported binary draws version");
  return parse_text(bytes);
}

void save_draws(const DrawsStore& store, const std::string& path, DrawsFormat format) {
  write_file_atomic(path, serialize_draws(store, format));
}

DrawsStore load_draws(const std::string& path) {
  try {
    return deserialize_draws(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace bridgeord
