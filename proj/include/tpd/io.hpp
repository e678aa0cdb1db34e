#pragma once

// Dataset ingestion: CSV tables, portable graymap images and the JSON
// manifest that says how to turn records into tensors.
//
// CSV rules: comma delimiter, no quoting, a mandatory header row, one record
// per row. Blank lines and lines starting with '#' are skipped (the tools
// write their configuration into such lines).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpd/classify.hpp"
#include "tpd/tensor.hpp"

namespace tpd::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Throws FormatError naming the row and line of a ragged record.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

enum class DatasetFormat { CsvVectors, CsvTensors, ImageGrid };

std::string_view to_string(DatasetFormat f);

struct DatasetManifest {
  DatasetFormat format = DatasetFormat::CsvVectors;
  std::filesystem::path path;            // CSV file or image root directory
  Shape shape;                           // empty: inferred (csv-vectors, image-grid)
  std::optional<std::string> label_column;
  std::optional<std::string> id_column;
  std::string reshape_order = "row-major";

  /// Relative paths are resolved against `base_dir`.
  static DatasetManifest from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  static DatasetManifest load(const std::filesystem::path& file);
  nlohmann::json to_json() const;
};

struct Records {
  std::vector<std::string> ids;
  std::vector<std::string> labels;  // empty strings when unlabeled
  std::vector<DenseTensor> tensors;
};

/// Reads records from a CSV file. Columns other than the label and id
/// columns are values, in header order; their count must equal the product
/// of `shape` (an empty shape means one vector per row).
Records read_csv_records(const std::filesystem::path& path, const Shape& shape,
                         const std::optional<std::string>& label_column,
                         const std::optional<std::string>& id_column);

/// Records of a manifest; image grids label each image with its directory name.
Records load_records(const DatasetManifest& manifest);

/// Groups records by label in order of first appearance.
LabeledDataset group_by_label(const Records& records);

/// Binary (P5) or plain (P2) graymap, intensities scaled to [0, 1].
DenseTensor read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const DenseTensor& image, int maxval = 255);

/// One subdirectory per class (sorted by name), each holding same-size .pgm
/// images (sorted by name). Throws FormatError on size mismatches.
LabeledDataset load_image_grid(const std::filesystem::path& directory, const Shape& shape = {});

/// Parses "d1xd2[x...]".
Shape parse_shape(const std::string& text);
std::string shape_to_string(const Shape& shape);

}  // namespace tpd::io
