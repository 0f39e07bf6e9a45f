#include "cpageo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpageo/hash.hpp"
#include "cpageo/manifest.hpp"

namespace cpageo {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << content;
}

namespace {

void write_vec(std::ostream& out, const Vec& v) {
  out << "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    out << (i ? "," : "") << fmt17(v[i]);
  out << "]";
}

void write_linear(std::ostream& out, const LinearLayer& lin,
                  const BatchNormSlot* bn, const std::string& indent) {
  out << indent << "{\"rows\": " << lin.W.rows << ", \"cols\": " << lin.W.cols
      << ",\n" << indent << " \"W\": ";
  write_vec(out, lin.W.data);
  out << ",\n" << indent << " \"b\": ";
  write_vec(out, lin.b);
  if (bn != nullptr && bn->present) {
    out << ",\n" << indent << " \"bn\": {\"eps\": " << fmt17(bn->eps)
        << ", \"momentum\": " << fmt17(bn->momentum) << ",\n"
        << indent << "   \"gamma\": ";
    write_vec(out, bn->gamma);
    out << ",\n" << indent << "   \"beta\": ";
    write_vec(out, bn->beta);
    out << ",\n" << indent << "   \"running_mean\": ";
    write_vec(out, bn->running_mean);
    out << ",\n" << indent << "   \"running_var\": ";
    write_vec(out, bn->running_var);
    out << "}";
  }
  out << "}";
}

Vec json_vec(const nlohmann::json& j) {
  Vec v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << "{\n\"format\": \"cpageo-checkpoint\",\n\"format_version\": "
      << kFormatVersion << ",\n";
  out << "\"metadata\": {\"seed\": " << meta.seed << ", \"epoch\": " << meta.epoch
      << ", \"dataset\": \"" << meta.dataset << "\", \"manifest_hash\": \""
      << meta.manifest_hash << "\", \"widths\": [";
  const auto widths = net.widths();
  for (std::size_t i = 0; i < widths.size(); ++i)
    out << (i ? "," : "") << widths[i];
  out << "]},\n";
  out << "\"activation\": {\"breakpoints\": ";
  write_vec(out, net.activation().breakpoints());
  Vec slopes, intercepts;
  for (std::size_t k = 1; k <= net.activation().piece_count(); ++k) {
    slopes.push_back(net.activation().slope(static_cast<int>(k)));
    intercepts.push_back(net.activation().intercept(static_cast<int>(k)));
  }
  out << ", \"slopes\": ";
  write_vec(out, slopes);
  out << ", \"intercepts\": ";
  write_vec(out, intercepts);
  out << "},\n\"layers\": [\n";
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    write_linear(out, net.block(l).linear, &net.block(l).bn, " ");
    out << ",\n";
  }
  write_linear(out, net.output_layer(), nullptr, " ");
  out << "\n]}\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  nlohmann::json j;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw IoError("cannot parse checkpoint " + path + ": " + e.what());
    }
  }
  if (j.value("format", "") != std::string("cpageo-checkpoint"))
    throw IoError("not a checkpoint file: " + path);

  CpaActivation act(json_vec(j["activation"]["breakpoints"]),
                    json_vec(j["activation"]["slopes"]),
                    json_vec(j["activation"]["intercepts"]));

  std::vector<HiddenBlock> blocks;
  LinearLayer output;
  const auto& layers = j["layers"];
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& jl = layers[l];
    LinearLayer lin;
    lin.W.rows = jl["rows"].get<std::size_t>();
    lin.W.cols = jl["cols"].get<std::size_t>();
    lin.W.data = json_vec(jl["W"]);
    lin.b = json_vec(jl["b"]);
    if (lin.W.data.size() != lin.W.rows * lin.W.cols)
      throw IoError("checkpoint: W size mismatch");
    if (l + 1 == layers.size()) {
      output = std::move(lin);
    } else {
      HiddenBlock blk;
      blk.linear = std::move(lin);
      if (jl.contains("bn")) {
        const auto& jb = jl["bn"];
        blk.bn.present = true;
        blk.bn.eps = jb["eps"].get<double>();
        blk.bn.momentum = jb["momentum"].get<double>();
        blk.bn.gamma = json_vec(jb["gamma"]);
        blk.bn.beta = json_vec(jb["beta"]);
        blk.bn.running_mean = json_vec(jb["running_mean"]);
        blk.bn.running_var = json_vec(jb["running_var"]);
      }
      blocks.push_back(std::move(blk));
    }
  }
  const auto& jm = j["metadata"];
  CheckpointMeta meta;
  meta.seed = jm.value("seed", 0ull);
  meta.epoch = jm.value("epoch", 0ull);
  meta.dataset = jm.value("dataset", "");
  meta.manifest_hash = jm.value("manifest_hash", "");
  const std::size_t input_dim = jm["widths"][0].get<std::size_t>();
  return {Network(input_dim, std::move(blocks), std::move(output), std::move(act)),
          meta};
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty CSV: " + path);
  Mat m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw IoError("ragged CSV: " + path);
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {
std::ofstream open_csv(const std::string& path, const std::string& manifest_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << "# manifest=" << manifest_hash << " tool_version=" << kToolVersion << "\n";
  return out;
}
}  // namespace

void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j)
      out << (j ? "," : "") << fmt17(m(i, j));
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const Dataset& d,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.dim(); ++j) out << fmt17(d.X(i, j)) << ",";
    out << d.labels[i] << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  const Mat m = read_matrix_csv(path);
  if (m.cols < 2) throw IoError("dataset CSV needs at least 2 columns");
  Dataset d;
  d.X = Mat(m.rows, m.cols - 1);
  d.labels.resize(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j + 1 < m.cols; ++j) d.X(i, j) = m(i, j);
    d.labels[i] = static_cast<int>(m(i, m.cols - 1));
  }
  d.name = path;
  return d;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<EpochMetrics>& metrics,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  out << "epoch,loss,train_acc,val_acc\n";
  for (const EpochMetrics& m : metrics)
    out << m.epoch << "," << fmt17(m.loss) << "," << fmt17(m.train_acc) << ","
        << fmt17(m.val_acc) << "\n";
}

void write_offsets_csv(const std::string& path,
                       const std::map<int, std::vector<OffsetRecord>>& offsets,
                       std::uint64_t seed, std::uint64_t epoch,
                       const std::string& batch_id,
                       const std::vector<double>& radii,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  out << "seed,epoch,batch_id,layer,neuron,breakpoint,variant,delta,l1_norm,numerator";
  for (double r : radii) out << ",cut_at_r" << fmt17(r);
  out << "\n";
  for (const auto& [layer, records] : offsets) {
    for (const OffsetRecord& rec : records) {
      out << seed << "," << epoch << "," << batch_id << "," << rec.layer << ","
          << rec.neuron << "," << rec.breakpoint << "," << variant_name(rec.variant)
          << "," << fmt17(rec.delta) << "," << fmt17(rec.l1_norm) << ","
          << fmt17(rec.numerator);
      for (double r : radii) out << "," << (rec.delta < r ? 1 : 0);
      out << "\n";
    }
  }
}

std::string pattern_hash(const ActivationPattern& pattern) {
  return to_hex(fnv1a64(pattern.data(), pattern.size() * sizeof(int)));
}

void write_regions_csv(const std::string& path,
                       const std::vector<RegionCell>& cells,
                       const std::vector<int>& labels,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  out << "cell_id,vertices,pattern_hash,label,area\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << i << ",\"";
    for (std::size_t v = 0; v < cells[i].polygon.size(); ++v) {
      if (v) out << ";";
      out << fmt17(cells[i].polygon[v].x) << " " << fmt17(cells[i].polygon[v].y);
    }
    out << "\"," << pattern_hash(cells[i].pattern) << ",";
    if (i < labels.size())
      out << labels[i];
    else
      out << -1;
    out << "," << fmt17(polygon_area(cells[i].polygon)) << "\n";
  }
}

void write_density_csv(const std::string& path,
                       const std::vector<DensityCsvRow>& rows,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path, manifest_hash);
  out << "center,r,count,density\n";
  for (const DensityCsvRow& row : rows)
    out << row.center_name << "," << fmt17(row.r) << "," << row.count << ","
        << fmt17(row.density) << "\n";
}

}  // namespace cpageo
