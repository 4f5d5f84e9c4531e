#pragma once

#include <optional>
#include <string>
#include <vector>

#include "narrow/affine.hpp"
#include "narrow/string_io.hpp"

namespace narrow {

struct NetMeta {
  std::string provenance;
  std::optional<Ball> domain;
  json extra = json::object();
};

// A_k ∘ ReLU ∘ A_{k-1} ∘ ... ∘ ReLU ∘ A_1. depth() is k, the number of affine
// maps; hidden widths are the output sizes of A_1 .. A_{k-1}.
class ReluNet {
 public:
  using Meta = NetMeta;

  explicit ReluNet(std::vector<AffineMap> layers, Meta meta = {}) : layers_(std::move(layers)), meta_(std::move(meta)) {
    if (layers_.empty()) throw InvalidInput("network needs at least one affine layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].rows() < 1 || layers_[i].cols() < 1) throw InvalidInput("network layer with zero dimension");
      if (i > 0 && layers_[i].cols() != layers_[i - 1].rows()) {
        throw InvalidInput("layer " + std::to_string(i) + " input does not match layer " + std::to_string(i - 1) +
                           " output");
      }
    }
    if (meta_.domain && meta_.domain->dim() != d_in()) throw InvalidInput("domain ball has wrong dimension");
  }

  Eigen::Index d_in() const { return layers_.front().cols(); }
  Eigen::Index d_out() const { return layers_.back().rows(); }
  std::size_t depth() const { return layers_.size(); }
  const std::vector<AffineMap>& layers() const { return layers_; }
  const Meta& meta() const { return meta_; }
  Meta& meta() { return meta_; }

  std::vector<Eigen::Index> hidden_widths() const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) out.push_back(layers_[i].rows());
    return out;
  }

  bool operator==(const ReluNet& o) const { return layers_ == o.layers_; }

 private:
  std::vector<AffineMap> layers_;
  Meta meta_;
};

inline Vector forward(const ReluNet& net, const Vector& x) {
  require_dim(x.size(), net.d_in(), "forward input");
  Vector z = x;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    z = layers[i].weights() * z + layers[i].offset();
    if (!z.allFinite()) throw NumericError("non-finite activation after layer " + std::to_string(i));
    if (i + 1 < layers.size()) z = z.cwiseMax(0.0);
  }
  return z;
}

// Columns of `points` are inputs; returns d_out x N.
inline Matrix forward_batch(const ReluNet& net, const Matrix& points) {
  require_dim(points.rows(), net.d_in(), "forward input");
  Matrix z = points;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix next = layers[i].weights() * z;
    next.colwise() += layers[i].offset();
    if (!next.allFinite()) throw NumericError("non-finite activation after layer " + std::to_string(i));
    if (i + 1 < layers.size()) next = next.cwiseMax(0.0);
    z = std::move(next);
  }
  return z;
}

inline json net_to_json(const ReluNet& net) {
  json doc;
  doc["version"] = 1;
  doc["d_in"] = net.d_in();
  doc["d_out"] = net.d_out();
  json layers = json::array();
  for (const auto& a : net.layers()) layers.push_back(detail::affine_to_json(a));
  doc["layers"] = std::move(layers);
  json meta = net.meta().extra.is_object() ? net.meta().extra : json::object();
  meta["provenance"] = net.meta().provenance;
  if (net.meta().domain) {
    meta["domain"] = json{{"center", detail::vector_to_json(net.meta().domain->center)},
                          {"radius", net.meta().domain->radius}};
  }
  meta["hidden_widths"] = net.hidden_widths();
  meta["depth"] = net.depth();
  doc["meta"] = std::move(meta);
  return doc;
}

inline ReluNet net_from_json(const json& doc) {
  detail::check_version(doc);
  const auto d_in = detail::count_from_json(doc, "d_in");
  const auto d_out = detail::count_from_json(doc, "d_out");
  if (!doc.contains("layers") || !doc.at("layers").is_array() || doc.at("layers").empty()) {
    throw SchemaError("missing or empty 'layers' array");
  }
  std::vector<AffineMap> layers;
  Eigen::Index cols = d_in;
  for (const auto& l : doc.at("layers")) {
    if (!l.is_object() || !l.contains("b")) throw SchemaError("layer needs W and b");
    const auto rows = static_cast<Eigen::Index>(l.at("b").size());
    if (rows < 1) throw SchemaError("layer has empty offset");
    layers.push_back(detail::affine_from_json(l, rows, cols));
    cols = rows;
  }
  if (cols != d_out) throw SchemaError("last layer output does not match d_out");
  ReluNet::Meta meta;
  if (doc.contains("meta") && doc.at("meta").is_object()) {
    const auto& m = doc.at("meta");
    meta.extra = m;
    meta.extra.erase("provenance");
    meta.extra.erase("domain");
    meta.extra.erase("hidden_widths");
    meta.extra.erase("depth");
    if (m.contains("provenance") && m.at("provenance").is_string()) meta.provenance = m.at("provenance");
    if (m.contains("domain")) {
      const auto& d = m.at("domain");
      if (!d.is_object() || !d.contains("center") || !d.contains("radius")) throw SchemaError("bad domain block");
      Vector c = detail::vector_from_json(d.at("center"));
      if (c.size() != d_in) throw SchemaError("domain center has wrong dimension");
      meta.domain = Ball(c, detail::number_from_json(d.at("radius")));
    }
  }
  return ReluNet(std::move(layers), std::move(meta));
}

inline std::string serialize_net(const ReluNet& net) { return net_to_json(net).dump() + "\n"; }

inline ReluNet deserialize_net(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return net_from_json(doc);
}

}  // namespace narrow
