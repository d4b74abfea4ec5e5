#include "nrel/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nrel/csvio.hpp"

namespace nrel {

namespace {

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(data[i]);
    char bytes[8];
    for (int b = 0; b < 8; ++b) {
      bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(bytes, 8);
  }
}

void read_doubles(std::ifstream& in, double* data, std::size_t n,
                  const std::string& what) {
  for (std::size_t i = 0; i < n; ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) {
      throw std::invalid_argument(what + ": truncated payload");
    }
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[b]))
              << (8 * b);
    }
    data[i] = std::bit_cast<double>(bits);
  }
}

std::ofstream open_out(const std::filesystem::path& path, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument(std::string(what) + ": cannot open " +
                                path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument(std::string(what) + ": cannot open " +
                                path.string());
  }
  return in;
}

std::string read_header(std::ifstream& in, const std::string& magic,
                        const char* what) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(magic, 0) != 0) {
    throw std::invalid_argument(std::string(what) + ": expected " + magic +
                                " header");
  }
  return line.substr(magic.size());
}

}  // namespace

void save_vector(const std::filesystem::path& path, const Vec& v) {
  auto out = open_out(path, "save_vector");
  out << "NRELVEC " << v.size() << '\n';
  write_doubles(out, v.data(), v.size());
}

Vec load_vector(const std::filesystem::path& path) {
  auto in = open_in(path, "load_vector");
  std::istringstream hs(read_header(in, "NRELVEC", "load_vector"));
  std::size_t n = 0;
  if (!(hs >> n)) throw std::invalid_argument("load_vector: bad header");
  Vec v(n);
  read_doubles(in, v.data(), n, "load_vector");
  return v;
}

void save_matrix(const std::filesystem::path& path, const Mat& m) {
  auto out = open_out(path, "save_matrix");
  const std::size_t r = m.size();
  const std::size_t c = r ? m[0].size() : 0;
  out << "NRELMAT " << r << ' ' << c << '\n';
  for (const auto& row : m) {
    if (row.size() != c) throw std::invalid_argument("save_matrix: ragged");
    write_doubles(out, row.data(), c);
  }
}

Mat load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path, "load_matrix");
  std::istringstream hs(read_header(in, "NRELMAT", "load_matrix"));
  std::size_t r = 0, c = 0;
  if (!(hs >> r >> c)) throw std::invalid_argument("load_matrix: bad header");
  Mat m(r, Vec(c));
  for (auto& row : m) read_doubles(in, row.data(), c, "load_matrix");
  return m;
}

void save_embedding(const std::filesystem::path& path, const Embedding& e) {
  auto out = open_out(path, "save_embedding");
  out << "NRELEMB " << e.n() << ' ' << e.dim() << '\n';
  for (const auto& row : e.tokens) write_doubles(out, row.data(), row.size());
}

Embedding load_embedding(const std::filesystem::path& path) {
  auto in = open_in(path, "load_embedding");
  std::istringstream hs(read_header(in, "NRELEMB", "load_embedding"));
  std::size_t n = 0, d = 0;
  if (!(hs >> n >> d)) throw std::invalid_argument("load_embedding: bad header");
  Mat rows(n, Vec(d));
  for (auto& row : rows) read_doubles(in, row.data(), d, "load_embedding");
  return Embedding::from_rows(std::move(rows));
}

void save_embedding_list(const std::filesystem::path& path,
                         const std::vector<Embedding>& list) {
  auto out = open_out(path, "save_embedding_list");
  const std::size_t s = list.size();
  const std::size_t n = s ? list[0].n() : 0;
  const std::size_t d = s ? list[0].dim() : 0;
  out << "NRELEMBL " << s << ' ' << n << ' ' << d << '\n';
  for (const auto& e : list) {
    if (e.n() != n || e.dim() != d) {
      throw std::invalid_argument("save_embedding_list: inconsistent shapes");
    }
    for (const auto& row : e.tokens) write_doubles(out, row.data(), d);
  }
}

std::vector<Embedding> load_embedding_list(const std::filesystem::path& path) {
  auto in = open_in(path, "load_embedding_list");
  std::istringstream hs(read_header(in, "NRELEMBL", "load_embedding_list"));
  std::size_t s = 0, n = 0, d = 0;
  if (!(hs >> s >> n >> d)) {
    throw std::invalid_argument("load_embedding_list: bad header");
  }
  std::vector<Embedding> list;
  list.reserve(s);
  for (std::size_t i = 0; i < s; ++i) {
    Mat rows(n, Vec(d));
    for (auto& row : rows) read_doubles(in, row.data(), d, "load_embedding_list");
    list.push_back(Embedding::from_rows(std::move(rows)));
  }
  return list;
}

void save_net(const std::filesystem::path& path, const DenoiserNet& net) {
  auto out = open_out(path, "save_net");
  out << "NRELNET " << net.D << ' ' << net.H << ' ' << net.F << ' ' << net.d
      << '\n';
  write_doubles(out, net.params.data(), net.params.size());
}

DenoiserNet load_net(const std::filesystem::path& path) {
  auto in = open_in(path, "load_net");
  std::istringstream hs(read_header(in, "NRELNET", "load_net"));
  DenoiserNet net;
  if (!(hs >> net.D >> net.H >> net.F >> net.d)) {
    throw std::invalid_argument("load_net: bad header");
  }
  net.params.assign(net.param_count(), 0.0);
  read_doubles(in, net.params.data(), net.params.size(), "load_net");
  return net;
}

void save_vocab(const std::filesystem::path& path,
                const PromptVocabulary& vocab) {
  auto out = open_out(path, "save_vocab");
  out << "NRELVOC " << vocab.tokens.size() << ' ' << vocab.dim() << ' '
      << vocab.seed << '\n';
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    out << vocab.tokens[i];
    for (double v : vocab.table[i]) out << ' ' << format_double(v);
    out << '\n';
  }
}

PromptVocabulary load_vocab(const std::filesystem::path& path) {
  auto in = open_in(path, "load_vocab");
  std::istringstream hs(read_header(in, "NRELVOC", "load_vocab"));
  std::size_t V = 0, d = 0;
  PromptVocabulary vocab;
  if (!(hs >> V >> d >> vocab.seed)) {
    throw std::invalid_argument("load_vocab: bad header");
  }
  std::string line;
  for (std::size_t i = 0; i < V; ++i) {
    if (!std::getline(in, line)) {
      throw std::invalid_argument("load_vocab: truncated");
    }
    std::istringstream ls(line);
    std::string token;
    // The reserved null token is the empty string; its line starts with the
    // separator, so a failed token read means "".
    if (line.empty() || line[0] == ' ') {
      token = "";
      ls.str(line);
    } else {
      ls >> token;
    }
    Vec row(d);
    for (auto& v : row) {
      if (!(ls >> v)) throw std::invalid_argument("load_vocab: bad row");
    }
    vocab.tokens.push_back(token);
    vocab.table.push_back(std::move(row));
  }
  return vocab;
}

}  // namespace nrel
