#include "rerankkit/io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "rerankkit/errors.hpp"
#include "rerankkit/kitti.hpp"
#include "rerankkit/model.hpp"

namespace fs = std::filesystem;

namespace rerankkit {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file", path.string(), 0);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing", tmp.string(), 0);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed", tmp.string(), 0);
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------- PGM

std::string encode_pgm(const Grid<std::uint8_t>& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(mask.data().data()), mask.size());
  return out;
}

namespace {

// Reads one unsigned decimal header token, skipping whitespace and comments.
std::uint64_t pgm_token(std::string_view bytes, std::size_t& pos, const std::string& source) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  std::uint64_t v = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
    if (v > (1u << 30)) throw MalformedHeaderError("header value too large", source, start);
    ++pos;
  }
  if (pos == start) throw MalformedHeaderError("expected a number in PGM header", source, start);
  return v;
}

}  // namespace

Grid<std::uint8_t> decode_pgm(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") {
    throw MalformedHeaderError("missing P5 magic", source, 0);
  }
  std::size_t pos = 2;
  const auto w = pgm_token(bytes, pos, source);
  const auto h = pgm_token(bytes, pos, source);
  const auto maxval = pgm_token(bytes, pos, source);
  if (w == 0 || h == 0) throw MalformedHeaderError("zero image dimension", source, pos);
  if (maxval == 0 || maxval > 255) {
    throw MalformedHeaderError("maxval must be 1..255 (one byte per pixel)", source, pos);
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw MalformedHeaderError("missing whitespace after maxval", source, pos);
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w * h);
  if (bytes.size() - pos < n) {
    throw TruncatedPayloadError("expected " + std::to_string(n) + " pixel bytes, found " +
                                    std::to_string(bytes.size() - pos),
                                source, bytes.size());
  }
  if (bytes.size() - pos > n) {
    throw MalformedHeaderError("trailing bytes after pixel payload", source, pos + n);
  }
  Grid<std::uint8_t> mask(static_cast<int>(w), static_cast<int>(h));
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), mask.data().begin());
  return mask;
}

Grid<std::uint8_t> read_pgm(const fs::path& path) { return decode_pgm(read_file(path), path.string()); }

// ---------------------------------------------------------------- HMAP

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string encode_hmap(const Grid<float>& heights) {
  std::string out = "HMAP";
  out.reserve(12 + 4 * heights.size());
  put_u32(out, static_cast<std::uint32_t>(heights.width()));
  put_u32(out, static_cast<std::uint32_t>(heights.height()));
  for (float v : heights.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Grid<float> decode_hmap(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "HMAP") {
    throw MalformedHeaderError("missing HMAP magic", source, 0);
  }
  if (bytes.size() < 12) {
    throw MalformedHeaderError("header shorter than 12 bytes", source, bytes.size());
  }
  const std::uint32_t w = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16)) {
    throw MalformedHeaderError("implausible dimensions " + std::to_string(w) + "x" + std::to_string(h),
                               source, 4);
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() - 12 < 4 * n) {
    throw TruncatedPayloadError("expected " + std::to_string(4 * n) + " payload bytes, found " +
                                    std::to_string(bytes.size() - 12),
                                source, bytes.size());
  }
  if (bytes.size() - 12 > 4 * n) {
    throw MalformedHeaderError("trailing bytes after payload", source, 12 + 4 * n);
  }
  Grid<float> grid(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < n; ++i) grid.data()[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
  return grid;
}

Grid<float> read_hmap(const fs::path& path) { return decode_hmap(read_file(path), path.string()); }

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

struct CsvLines {
  explicit CsvLines(std::string_view text) : text_(text) {}

  // Next non-blank line; false at end of text.
  bool next(std::string& line) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      line.assign(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

double csv_double(const std::string& tok, const std::string& source, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("not a finite number: '" + tok + "'", source, line);
  }
  return v;
}

int csv_int(const std::string& tok, const std::string& source, std::size_t line) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError("not an integer: '" + tok + "'", source, line);
  }
  return v;
}

void expect_header(CsvLines& lines, const std::vector<std::string>& expected, const std::string& source,
                   bool allow_extra) {
  std::string line;
  if (!lines.next(line)) throw ParseError("missing CSV header", source, 1);
  const auto cols = split_csv(line);
  const bool ok = cols.size() >= expected.size() && (allow_extra || cols.size() == expected.size()) &&
                  std::equal(expected.begin(), expected.end(), cols.begin());
  if (!ok) throw ParseError("unexpected CSV header '" + line + "'", source, lines.line_no());
}

}  // namespace

std::string encode_proposals_csv(std::span<const Proposal> proposals, std::span<const double> rerank_scores) {
  if (!rerank_scores.empty() && rerank_scores.size() != proposals.size()) {
    throw std::invalid_argument("encode_proposals_csv: score count differs from proposal count");
  }
  std::string out = rerank_scores.empty() ? "x1,y1,x2,y2,score,objectness\n"
                                          : "x1,y1,x2,y2,score,objectness,rerank_score\n";
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Proposal& p = proposals[i];
    out += format_double(p.box.x1) + ',' + format_double(p.box.y1) + ',' + format_double(p.box.x2) +
           ',' + format_double(p.box.y2) + ',' + format_double(p.generator_score) + ',' +
           format_double(p.objectness);
    if (!rerank_scores.empty()) out += ',' + format_double(rerank_scores[i]);
    out += '\n';
  }
  return out;
}

std::vector<Proposal> decode_proposals_csv(std::string_view text, const std::string& source) {
  CsvLines lines(text);
  expect_header(lines, {"x1", "y1", "x2", "y2", "score", "objectness"}, source, true);
  std::vector<Proposal> out;
  std::string line;
  while (lines.next(line)) {
    const auto f = split_csv(line);
    if (f.size() < 6) throw ParseError("expected at least 6 columns", source, lines.line_no());
    Proposal p;
    p.box = {csv_double(f[0], source, lines.line_no()), csv_double(f[1], source, lines.line_no()),
             csv_double(f[2], source, lines.line_no()), csv_double(f[3], source, lines.line_no())};
    p.generator_score = csv_double(f[4], source, lines.line_no());
    p.objectness = csv_double(f[5], source, lines.line_no());
    if (!p.box.valid()) throw ParseError("degenerate proposal box", source, lines.line_no());
    if (p.objectness < 0.0 || p.objectness > 1.0) {
      throw ParseError("objectness outside [0, 1]", source, lines.line_no());
    }
    out.push_back(p);
  }
  return out;
}

std::string encode_labels_csv(std::span<const GroundTruthObject> objects, const ClassMap& classes) {
  std::string out = "class,x1,y1,x2,y2,occlusion,truncation\n";
  for (const GroundTruthObject& g : objects) {
    const auto name = classes.name_of(g.class_id);
    if (!name) throw std::invalid_argument("class id " + std::to_string(g.class_id) + " has no name");
    out += *name + ',' + format_double(g.box.x1) + ',' + format_double(g.box.y1) + ',' +
           format_double(g.box.x2) + ',' + format_double(g.box.y2) + ',' + std::to_string(g.occlusion) +
           ',' + format_double(g.truncation) + '\n';
  }
  return out;
}

std::vector<GroundTruthObject> decode_labels_csv(std::string_view text, const std::string& source,
                                                 const ClassMap& classes) {
  CsvLines lines(text);
  expect_header(lines, {"class", "x1", "y1", "x2", "y2", "occlusion", "truncation"}, source, false);
  std::vector<GroundTruthObject> out;
  std::string line;
  while (lines.next(line)) {
    const std::size_t n = lines.line_no();
    const auto f = split_csv(line);
    if (f.size() != 7) throw ParseError("expected 7 columns", source, n);
    const auto id = classes.id_of(f[0]);
    if (!id) throw ParseError("unknown class '" + f[0] + "'", source, n);
    GroundTruthObject g;
    g.class_id = *id;
    g.box = {csv_double(f[1], source, n), csv_double(f[2], source, n), csv_double(f[3], source, n),
             csv_double(f[4], source, n)};
    g.occlusion = csv_int(f[5], source, n);
    g.truncation = csv_double(f[6], source, n);
    if (!g.box.valid()) throw ParseError("degenerate label box", source, n);
    if (g.occlusion < 0 || g.occlusion > 3) throw ParseError("occlusion must be 0..3", source, n);
    if (g.truncation < 0.0 || g.truncation > 1.0) throw ParseError("truncation outside [0, 1]", source, n);
    out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------- manifest

SceneManifest read_manifest(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  SceneManifest m;
  m.base_dir = path.parent_path();
  ClassMap custom;
  bool has_custom = false;
  std::optional<ClassId> road;

  std::size_t line_no = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      cols.push_back(line.substr(start, tab - start));
    }
    cols.push_back(line.substr(start));

    if (cols[0] == "#class") {
      if (cols.size() != 3) throw ParseError("expected #class<TAB>name<TAB>id", source, line_no);
      try {
        custom.add(cols[1], csv_int(cols[2], source, line_no));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), source, line_no);
      }
      has_custom = true;
      continue;
    }
    if (cols[0] == "#road") {
      if (cols.size() != 2) throw ParseError("expected #road<TAB>id", source, line_no);
      road = csv_int(cols[1], source, line_no);
      continue;
    }
    if (line[0] == '#') continue;
    if (cols.size() != 5) {
      throw ParseError("expected 5 tab-separated columns, found " + std::to_string(cols.size()), source,
                       line_no);
    }
    m.entries.push_back(ManifestEntry{cols[0], cols[1], cols[2], cols[3], cols[4]});
  }
  if (has_custom) {
    if (!road) road = custom.id_of("road");
    if (!road) throw ParseError("custom class map without a road id", source, line_no);
    custom.set_road(*road);
    m.classes = custom;
  } else if (road) {
    m.classes.set_road(*road);
  }
  return m;
}

std::string encode_manifest(const SceneManifest& manifest) {
  std::string out;
  for (const auto& [name, id] : manifest.classes.entries()) {
    out += "#class\t" + name + '\t' + std::to_string(id) + '\n';
  }
  out += "#road\t" + std::to_string(manifest.classes.road_id()) + '\n';
  for (const ManifestEntry& e : manifest.entries) {
    out += e.id + '\t' + e.mask.generic_string() + '\t' + e.hmap.generic_string() + '\t' +
           e.proposals.generic_string() + '\t' + e.labels.generic_string() + '\n';
  }
  return out;
}

Scene load_scene(const SceneManifest& manifest, const ManifestEntry& entry) {
  Scene s;
  s.id = entry.id;
  const fs::path mask_path = manifest.resolve(entry.mask);
  const fs::path hmap_path = manifest.resolve(entry.hmap);
  s.seg_mask = read_pgm(mask_path);
  s.height_map = read_hmap(hmap_path);
  s.width = s.seg_mask.width();
  s.height = s.seg_mask.height();
  if (s.height_map.width() != s.width || s.height_map.height() != s.height) {
    throw DimensionMismatchError("height map is " + std::to_string(s.height_map.width()) + "x" +
                                     std::to_string(s.height_map.height()) + ", mask is " +
                                     std::to_string(s.width) + "x" + std::to_string(s.height),
                                 hmap_path.string(), 4);
  }
  const fs::path prop_path = manifest.resolve(entry.proposals);
  s.proposals = decode_proposals_csv(read_file(prop_path), prop_path.string());
  const fs::path label_path = manifest.resolve(entry.labels);
  const std::string label_text = read_file(label_path);
  if (label_path.extension() == ".txt") {
    s.ground_truth = parse_kitti_labels(label_text, manifest.classes, nullptr, label_path.string());
  } else {
    s.ground_truth = decode_labels_csv(label_text, label_path.string(), manifest.classes);
  }
  return s;
}

std::vector<Scene> load_scenes(const SceneManifest& manifest) {
  std::vector<Scene> scenes;
  scenes.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries) scenes.push_back(load_scene(manifest, e));
  return scenes;
}

void save_scene(const Scene& scene, const SceneManifest& manifest, const ManifestEntry& entry) {
  scene.validate();
  write_file_atomic(manifest.resolve(entry.mask), encode_pgm(scene.seg_mask));
  write_file_atomic(manifest.resolve(entry.hmap), encode_hmap(scene.height_map));
  write_file_atomic(manifest.resolve(entry.proposals), encode_proposals_csv(scene.proposals));
  write_file_atomic(manifest.resolve(entry.labels), encode_labels_csv(scene.ground_truth, manifest.classes));
}

}  // namespace rerankkit
