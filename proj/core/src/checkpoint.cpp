#include "msgreen/checkpoint.hpp"

#include "msgreen/csv.hpp"

#include <fstream>
#include <sstream>

namespace msgreen::checkpoint {

namespace {

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(std::string("checkpoint: missing ") + what);
  return line;
}

std::string expect_tagged(std::istream& in, const std::string& tag) {
  std::istringstream ls(expect_line(in, tag.c_str()));
  std::string got;
  ls >> got;
  if (got != tag) throw IoError("checkpoint: expected '" + tag + "', found '" + got + "'");
  std::string rest;
  std::getline(ls, rest);
  return rest.empty() ? rest : rest.substr(1);  // drop the separating space
}

}  // namespace

void write_network(std::ostream& out, const net::Network& n) {
  out << "msgreen-net v1\n";
  out << "activation " << net::activation_name(n.activation()) << "\n";
  const auto& s = n.scale();
  out << "scale " << format_double(s.epsilon) << " " << format_double(s.alpha) << " "
      << format_double(s.beta) << "\n";
  out << "seed " << n.init_seed() << "\n";
  out << "layers " << n.layer_count() << "\n";
  for (const auto& l : n.layers()) out << "layer " << l.in_dim << " " << l.out_dim << "\n";
  out << "params " << n.param_count() << "\n";
  const Vec& p = n.params();
  for (long i = 0; i < p.size(); ++i) out << format_double(p[i]) << "\n";
}

net::Network read_network(std::istream& in) {
  if (expect_line(in, "header") != "msgreen-net v1")
    throw IoError("checkpoint: unrecognized network header");
  const net::Activation act = net::activation_from_name(expect_tagged(in, "activation"));
  net::ScaleParams scale;
  {
    std::istringstream ls(expect_tagged(in, "scale"));
    std::string e, a, b;
    ls >> e >> a >> b;
    scale.epsilon = parse_double(e);
    scale.alpha = parse_double(a);
    scale.beta = parse_double(b);
  }
  const std::uint64_t seed = std::stoull(expect_tagged(in, "seed"));
  const int nl = std::stoi(expect_tagged(in, "layers"));
  if (nl < 1) throw IoError("checkpoint: bad layer count");
  std::vector<net::LayerSpec> layers;
  for (int l = 0; l < nl; ++l) {
    std::istringstream ls(expect_tagged(in, "layer"));
    net::LayerSpec spec;
    ls >> spec.in_dim >> spec.out_dim;
    layers.push_back(spec);
  }
  const int np = std::stoi(expect_tagged(in, "params"));
  net::Network n(std::move(layers), act, scale);
  if (n.param_count() != np) throw IoError("checkpoint: parameter count mismatch");
  Vec& p = n.params();
  for (int i = 0; i < np; ++i) p[i] = parse_double(expect_line(in, "parameter"));
  n.set_init_seed(seed);
  return n;
}

void save_network(const net::Network& n, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  write_network(out, n);
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

net::Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  return read_network(in);
}

void save_msnet(const msnn::MsNet& ms, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << "msgreen-msnet v1\n";
  out << "dim " << ms.dim << "\n";
  write_network(out, ms.large);
  write_network(out, ms.small);
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

msnn::MsNet load_msnet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  if (expect_line(in, "header") != "msgreen-msnet v1")
    throw IoError("checkpoint: unrecognized model header");
  const int dim = std::stoi(expect_tagged(in, "dim"));
  net::Network large = read_network(in);
  net::Network small = read_network(in);
  return msnn::MsNet{std::move(large), std::move(small), dim};
}

}  // namespace msgreen::checkpoint
