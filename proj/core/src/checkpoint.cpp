#include "deephedge/checkpoint.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace deephedge {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'H', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

template <typename T>
void write_value(std::ofstream& out, T value) {
  write_raw(out, &value, sizeof(T));
}

void write_matrix_row_major(std::ofstream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_value(out, m(r, c));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
}

template <typename T>
T read_value(std::ifstream& in) {
  T value;
  read_raw(in, &value, sizeof(T));
  return value;
}

void read_matrix_row_major(std::ifstream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_value<double>(in);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const NetworkParams& params) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + file.string());

  write_raw(out, kMagic.data(), kMagic.size());
  write_value(out, kVersion);
  write_value(out, static_cast<std::int32_t>(params.arch.n_tasks));
  write_value(out, static_cast<std::int32_t>(params.arch.embed_dim));
  write_value(out, static_cast<std::int32_t>(params.arch.n_features));
  write_value(out, static_cast<std::int32_t>(params.arch.hidden.size()));
  for (int w : params.arch.hidden) write_value(out, static_cast<std::int32_t>(w));

  write_matrix_row_major(out, params.embedding);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    write_matrix_row_major(out, params.weights[l]);
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i)
      write_value(out, params.biases[l](i));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + file.string());
}

NetworkParams load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + file.string());

  std::array<char, 8> magic{};
  read_raw(in, magic.data(), magic.size());
  if (magic != kMagic) throw std::runtime_error("checkpoint: bad magic: " + file.string());
  if (read_value<std::uint32_t>(in) != kVersion)
    throw std::runtime_error("checkpoint: unsupported version: " + file.string());

  NetworkArch arch;
  arch.n_tasks = read_value<std::int32_t>(in);
  arch.embed_dim = read_value<std::int32_t>(in);
  arch.n_features = read_value<std::int32_t>(in);
  const int n_hidden = read_value<std::int32_t>(in);
  if (n_hidden < 0 || n_hidden > 1024) throw std::runtime_error("checkpoint: corrupt header");
  arch.hidden.resize(static_cast<std::size_t>(n_hidden));
  for (int& w : arch.hidden) w = read_value<std::int32_t>(in);
  arch.validate();

  NetworkParams params;
  params.arch = arch;
  params.embedding.resize(arch.n_tasks, arch.embed_dim);
  read_matrix_row_major(in, params.embedding);

  int in_dim = arch.input_dim();
  std::vector<int> outs = arch.hidden;
  outs.push_back(1);
  for (int width : outs) {
    Eigen::MatrixXd w(width, in_dim);
    read_matrix_row_major(in, w);
    Eigen::VectorXd b(width);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = read_value<double>(in);
    params.weights.push_back(std::move(w));
    params.biases.push_back(std::move(b));
    in_dim = width;
  }
  return params;
}

}  // namespace deephedge
