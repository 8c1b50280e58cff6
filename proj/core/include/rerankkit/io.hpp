#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rerankkit/scene.hpp"

namespace rerankkit {

/// On-disk formats.
///
///   seg mask   binary PGM (P5), maxval 255, one byte per pixel = class id
///   height map "HMAP", uint32 LE width, uint32 LE height, then width*height
///              float32 LE values in row-major order; NaN marks "no height"
///   proposals  CSV `x1,y1,x2,y2,score,objectness` (extra trailing columns,
///              such as `rerank_score`, are ignored on read)
///   labels     CSV `class,x1,y1,x2,y2,occlusion,truncation`, class by name,
///              boxes half-open; a `.txt` labels path is read as KITTI
///   manifest   one scene per line: id<TAB>mask<TAB>hmap<TAB>proposals<TAB>labels
///              Paths are relative to the manifest. Lines starting with `#`
///              are comments, except the directives `#class<TAB>name<TAB>id`
///              and `#road<TAB>id`; without `#class` lines the default
///              class map applies.

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string encode_pgm(const Grid<std::uint8_t>& mask);
Grid<std::uint8_t> decode_pgm(std::string_view bytes, const std::string& source);
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);

std::string encode_hmap(const Grid<float>& heights);
Grid<float> decode_hmap(std::string_view bytes, const std::string& source);
Grid<float> read_hmap(const std::filesystem::path& path);

/// `rerank_scores`, when given, adds a `rerank_score` column.
std::string encode_proposals_csv(std::span<const Proposal> proposals,
                                 std::span<const double> rerank_scores = {});
std::vector<Proposal> decode_proposals_csv(std::string_view text, const std::string& source);

std::string encode_labels_csv(std::span<const GroundTruthObject> objects, const ClassMap& classes);
std::vector<GroundTruthObject> decode_labels_csv(std::string_view text, const std::string& source,
                                                 const ClassMap& classes);

struct ManifestEntry {
  std::string id;
  std::filesystem::path mask;
  std::filesystem::path hmap;
  std::filesystem::path proposals;
  std::filesystem::path labels;
};

struct SceneManifest {
  std::vector<ManifestEntry> entries;
  ClassMap classes = ClassMap::defaults();
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

SceneManifest read_manifest(const std::filesystem::path& path);
/// Entry paths are written as stored; the class map is written as directives.
std::string encode_manifest(const SceneManifest& manifest);

/// Loads and cross-checks all four files of one scene.
Scene load_scene(const SceneManifest& manifest, const ManifestEntry& entry);
std::vector<Scene> load_scenes(const SceneManifest& manifest);

/// Writes the scene's four files at the entry's (resolved) paths.
void save_scene(const Scene& scene, const SceneManifest& manifest, const ManifestEntry& entry);

}  // namespace rerankkit
