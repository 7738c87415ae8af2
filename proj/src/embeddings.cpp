#include "rfsum/embeddings.hpp"

#include <fstream>
#include <sstream>

namespace rfsum {

TensorRef init_embedding_table(int vocab_size, int dim, Rng& rng) {
  if (vocab_size < 1 || dim < 1)
    throw InvalidArgument("embedding table needs positive dimensions");
  auto table = make_tensor({vocab_size, dim}, true);
  for (auto& x : table->v) x = rng.uniform(-0.1, 0.1);
  return table;
}

int load_pretrained(const std::string& path, const Vocabulary& vocab,
                    const TensorRef& table) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  if (table->ndim() != 2 || table->rows() != vocab.size())
    throw DimensionMismatch("table rows must match vocabulary size");
  const int dim = table->cols();
  int matched = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token))
      throw MalformedLine("line " + std::to_string(lineno) + ": no token");
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (!ls.eof())
      throw MalformedLine("line " + std::to_string(lineno) +
                          ": non-numeric vector entry");
    if (static_cast<int>(vals.size()) != dim)
      throw DimensionMismatch("line " + std::to_string(lineno) + ": got " +
                              std::to_string(vals.size()) +
                              " values, table dimension is " +
                              std::to_string(dim));
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    std::copy(vals.begin(), vals.end(),
              table->v.begin() + static_cast<size_t>(id) * dim);
    ++matched;
  }
  return matched;
}

}  // namespace rfsum
