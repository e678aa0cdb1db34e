#include "tpd/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "tpd/errors.hpp"

namespace fs = std::filesystem;

namespace tpd::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(const std::string& field, std::size_t row, std::size_t line, const std::string& column,
                  const std::string& source) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw FormatError(source + ": row " + std::to_string(row) + " (line " + std::to_string(line) + "), column '" +
                      column + "': '" + field + "' is not a number");
  }
  return v;
}

// Skips whitespace and '#' comments between PGM header tokens.
std::string pgm_token(std::istream& in) {
  std::string tok;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  return tok;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw FormatError(source + ": row " + std::to_string(table.rows.size() + 1) + " (line " +
                        std::to_string(line_no) + ") has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw FormatError(source + ": missing header row");
  return table;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

std::string_view to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::CsvVectors: return "csv-vectors";
    case DatasetFormat::CsvTensors: return "csv-tensors";
    case DatasetFormat::ImageGrid: return "image-grid";
  }
  return "csv-vectors";
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  DatasetManifest m;
  try {
    const auto format = doc.at("format").get<std::string>();
    if (format == "csv-vectors") m.format = DatasetFormat::CsvVectors;
    else if (format == "csv-tensors") m.format = DatasetFormat::CsvTensors;
    else if (format == "image-grid") m.format = DatasetFormat::ImageGrid;
    else throw FormatError("manifest: unknown format '" + format + "'");
    fs::path p = doc.at("path").get<std::string>();
    m.path = p.is_absolute() ? p : base_dir / p;
    if (doc.contains("shape")) {
      const auto& s = doc.at("shape");
      m.shape = s.is_string() ? parse_shape(s.get<std::string>()) : s.get<Shape>();
    }
    if (doc.contains("label_column")) m.label_column = doc.at("label_column").get<std::string>();
    if (doc.contains("id_column")) m.id_column = doc.at("id_column").get<std::string>();
    m.reshape_order = doc.value("reshape_order", m.reshape_order);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  if (m.format == DatasetFormat::CsvTensors && m.shape.empty()) throw FormatError("manifest: csv-tensors needs a shape");
  if (m.reshape_order != "row-major") throw FormatError("manifest: only row-major reshape order is supported");
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open manifest '" + file.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest '" + file.string() + "': " + e.what());
  }
  return from_json(doc, file.parent_path());
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json doc{{"format", std::string(to_string(format))}, {"path", path.string()}, {"reshape_order", reshape_order}};
  if (!shape.empty()) doc["shape"] = shape;
  if (label_column) doc["label_column"] = *label_column;
  if (id_column) doc["id_column"] = *id_column;
  return doc;
}

Records read_csv_records(const fs::path& path, const Shape& shape, const std::optional<std::string>& label_column,
                         const std::optional<std::string>& id_column) {
  const CsvTable table = read_csv(path);
  const std::string source = path.string();
  auto find_column = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw FormatError(source + ": no column named '" + name + "'");
    return it - table.header.begin();
  };
  const std::ptrdiff_t label_idx = label_column ? find_column(*label_column) : -1;
  const std::ptrdiff_t id_idx = id_column ? find_column(*id_column) : -1;

  std::vector<std::size_t> value_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (static_cast<std::ptrdiff_t>(c) != label_idx && static_cast<std::ptrdiff_t>(c) != id_idx) value_cols.push_back(c);
  if (value_cols.empty()) throw FormatError(source + ": no value columns");

  const Shape dims = shape.empty() ? Shape{value_cols.size()} : shape;
  if (shape_size(dims) != value_cols.size()) {
    throw FormatError(source + ": shape " + shape_to_string(dims) + " needs " + std::to_string(shape_size(dims)) +
                      " values per record, the file has " + std::to_string(value_cols.size()));
  }

  Records records;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<double> values;
    values.reserve(value_cols.size());
    for (std::size_t c : value_cols) values.push_back(parse_real(row[c], r + 1, table.line_numbers[r], table.header[c], source));
    records.tensors.emplace_back(dims, std::move(values));
    records.labels.push_back(label_idx >= 0 ? row[static_cast<std::size_t>(label_idx)] : std::string());
    records.ids.push_back(id_idx >= 0 ? row[static_cast<std::size_t>(id_idx)] : std::to_string(r + 1));
  }
  return records;
}

Records load_records(const DatasetManifest& manifest) {
  switch (manifest.format) {
    case DatasetFormat::CsvVectors:
      return read_csv_records(manifest.path, {}, manifest.label_column, manifest.id_column);
    case DatasetFormat::CsvTensors:
      return read_csv_records(manifest.path, manifest.shape, manifest.label_column, manifest.id_column);
    case DatasetFormat::ImageGrid: {
      const LabeledDataset data = load_image_grid(manifest.path, manifest.shape);
      Records records;
      for (Index j = 0; j < data.num_classes(); ++j) {
        for (Index i = 0; i < data[j].size(); ++i) {
          records.tensors.push_back(data[j][i]);
          records.labels.push_back(data.labels()[j]);
          records.ids.push_back(data.labels()[j] + "/" + std::to_string(i + 1));
        }
      }
      return records;
    }
  }
  throw FormatError("unsupported dataset format");
}

LabeledDataset group_by_label(const Records& records) {
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<DenseTensor>> groups;
  for (std::size_t i = 0; i < records.tensors.size(); ++i) {
    const auto [it, inserted] = slot.emplace(records.labels[i], groups.size());
    if (inserted) {
      labels.push_back(records.labels[i]);
      groups.emplace_back();
    }
    groups[it->second].push_back(records.tensors[i]);
  }
  std::vector<TensorSample> classes;
  for (auto& g : groups) classes.emplace_back(std::move(g));
  return LabeledDataset(std::move(labels), std::move(classes));
}

DenseTensor read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError(path.string() + ": not a PGM image (magic '" + magic + "')");
  long width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(pgm_token(in));
    height = std::stol(pgm_token(in));
    maxval = std::stol(pgm_token(in));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw FormatError(path.string() + ": invalid PGM header values");
  const auto count = static_cast<std::size_t>(width * height);
  std::vector<double> pixels(count);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw FormatError(path.string() + ": truncated pixel data");
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned v = bytes == 1 ? raw[k] : (unsigned(raw[2 * k]) << 8) | raw[2 * k + 1];
      pixels[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      long v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw FormatError(path.string() + ": bad or missing pixel value");
      pixels[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return DenseTensor({static_cast<Index>(height), static_cast<Index>(width)}, std::move(pixels));
}

void write_pgm(const fs::path& path, const DenseTensor& image, int maxval) {
  if (image.order() != 2) throw DimensionError("write_pgm needs an order-2 tensor");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path.string() + "'");
  out << "P5\n" << image.dim(1) << ' ' << image.dim(0) << '\n' << maxval << '\n';
  for (double v : image.data()) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
    if (maxval < 256) {
      out.put(static_cast<char>(q));
    } else {
      out.put(static_cast<char>(q >> 8));
      out.put(static_cast<char>(q & 0xff));
    }
  }
}

LabeledDataset load_image_grid(const fs::path& directory, const Shape& shape) {
  if (!fs::is_directory(directory)) throw IoError("image root '" + directory.string() + "' is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(directory))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw FormatError(directory.string() + ": no class directories");

  std::vector<std::string> labels;
  std::vector<TensorSample> classes;
  Shape expected = shape;
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError(dir.string() + ": no .pgm images");
    std::vector<DenseTensor> images;
    for (const auto& f : files) {
      DenseTensor img = read_pgm(f);
      if (expected.empty()) expected = img.dims();
      if (img.dims() != expected) {
        throw FormatError(f.string() + ": image is " + shape_to_string(img.dims()) + ", expected " +
                          shape_to_string(expected));
      }
      images.push_back(std::move(img));
    }
    labels.push_back(dir.filename().string());
    classes.emplace_back(std::move(images));
  }
  return LabeledDataset(std::move(labels), std::move(classes));
}

Shape parse_shape(const std::string& text) {
  Shape s;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto x = text.find('x', start);
    const std::string part = text.substr(start, x == std::string::npos ? std::string::npos : x - start);
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size() || v == 0) {
      throw FormatError("invalid shape '" + text + "' (expected e.g. 2x2 or 4x3x2)");
    }
    s.push_back(v);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  return s;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  return os.str();
}

}  // namespace tpd::io
