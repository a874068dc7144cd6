#include "detbench/costmodel.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "detbench/errors.hpp"
#include "detbench/util.hpp"

namespace detbench {

namespace {

struct ResolvedNode {
  std::vector<std::vector<int64_t>> input_shapes;
  std::vector<int64_t> output_shape;
};

int64_t channels_of(const std::vector<int64_t>& shape) { return shape[0]; }

int64_t flat_size(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

uint64_t se_mid(int64_t channels, int reduction) {
  return static_cast<uint64_t>((channels + reduction - 1) / reduction);
}

std::vector<ResolvedNode> resolve_all(const GraphIR& graph,
                                      const std::vector<int64_t>& input_shape) {
  graph.validate();
  if (input_shape.empty()) throw input_error("resolve_shapes: empty input shape");
  for (int64_t d : input_shape) {
    if (d < 1) throw input_error("resolve_shapes: input dimensions must be positive");
  }

  std::map<std::string, std::vector<int64_t>> known;
  std::vector<ResolvedNode> resolved;
  resolved.reserve(graph.nodes.size());

  for (const GraphNode& node : graph.nodes) {
    ResolvedNode rn;
    for (const auto& src : node.inputs) {
      if (src == "$in") {
        rn.input_shapes.push_back(input_shape);
      } else {
        auto it = known.find(src);
        if (it == known.end()) {
          throw input_error("graph node '" + node.name + "': unknown input '" + src + "'");
        }
        rn.input_shapes.push_back(it->second);
      }
    }

    const auto& in0 = rn.input_shapes[0];
    auto need_3d = [&]() {
      if (in0.size() != 3) {
        throw input_error("graph node '" + node.name + "': needs a [C,H,W] input");
      }
    };

    switch (node.kind) {
      case NodeKind::Conv: {
        need_3d();
        if (channels_of(in0) % node.groups != 0 || node.out_channels % node.groups != 0) {
          throw input_error("graph node '" + node.name + "': groups do not divide channels");
        }
        const int64_t h = (in0[1] + 2 * node.padding - node.kernel_h) / node.stride + 1;
        const int64_t w = (in0[2] + 2 * node.padding - node.kernel_w) / node.stride + 1;
        if (h < 1 || w < 1 || in0[1] + 2 * node.padding < node.kernel_h ||
            in0[2] + 2 * node.padding < node.kernel_w) {
          throw input_error("graph node '" + node.name + "': non-positive output size");
        }
        rn.output_shape = {node.out_channels, h, w};
        break;
      }
      case NodeKind::Pool: {
        need_3d();
        const int64_t h = (in0[1] + 2 * node.padding - node.kernel_h) / node.stride + 1;
        const int64_t w = (in0[2] + 2 * node.padding - node.kernel_w) / node.stride + 1;
        if (h < 1 || w < 1 || in0[1] + 2 * node.padding < node.kernel_h ||
            in0[2] + 2 * node.padding < node.kernel_w) {
          throw input_error("graph node '" + node.name + "': non-positive output size");
        }
        rn.output_shape = {channels_of(in0), h, w};
        break;
      }
      case NodeKind::Activation:
      case NodeKind::Se:
        if (node.kind == NodeKind::Se && in0.size() != 3) {
          throw input_error("graph node '" + node.name + "': needs a [C,H,W] input");
        }
        rn.output_shape = in0;
        break;
      case NodeKind::Upsample:
        need_3d();
        rn.output_shape = {in0[0], in0[1] * node.scale, in0[2] * node.scale};
        break;
      case NodeKind::Linear:
        rn.output_shape = {node.out_features};
        break;
      case NodeKind::Concat: {
        need_3d();
        int64_t channels = 0;
        for (const auto& shape : rn.input_shapes) {
          if (shape.size() != 3 || shape[1] != in0[1] || shape[2] != in0[2]) {
            throw input_error("graph node '" + node.name +
                              "': concat inputs must share spatial size");
          }
          channels += shape[0];
        }
        rn.output_shape = {channels, in0[1], in0[2]};
        break;
      }
    }
    known[node.name] = rn.output_shape;
    resolved.push_back(std::move(rn));
  }
  return resolved;
}

uint64_t node_params(const GraphNode& node, int64_t in_channels) {
  switch (node.kind) {
    case NodeKind::Conv: {
      const uint64_t k = static_cast<uint64_t>(node.kernel_h) * node.kernel_w;
      uint64_t p = k * static_cast<uint64_t>(in_channels / node.groups) * node.out_channels;
      if (node.bias) p += static_cast<uint64_t>(node.out_channels);
      return p;
    }
    case NodeKind::Linear: {
      uint64_t p = static_cast<uint64_t>(in_channels) * node.out_features;
      if (node.bias) p += static_cast<uint64_t>(node.out_features);
      return p;
    }
    case NodeKind::Se: {
      const uint64_t c = static_cast<uint64_t>(in_channels);
      const uint64_t m = se_mid(in_channels, node.reduction);
      return c * m + m + m * c + c;
    }
    default:
      return 0;
  }
}

}  // namespace

NodeKind node_kind_from_string(const std::string& tag) {
  if (tag == "conv") return NodeKind::Conv;
  if (tag == "linear") return NodeKind::Linear;
  if (tag == "pool") return NodeKind::Pool;
  if (tag == "activation") return NodeKind::Activation;
  if (tag == "se") return NodeKind::Se;
  if (tag == "upsample") return NodeKind::Upsample;
  if (tag == "concat") return NodeKind::Concat;
  throw input_error("unknown graph node kind: '" + tag + "'");
}

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Conv: return "conv";
    case NodeKind::Linear: return "linear";
    case NodeKind::Pool: return "pool";
    case NodeKind::Activation: return "activation";
    case NodeKind::Se: return "se";
    case NodeKind::Upsample: return "upsample";
    case NodeKind::Concat: return "concat";
  }
  throw input_error("unknown node kind");
}

void GraphIR::validate() const {
  if (nodes.empty()) throw input_error("graph has no nodes");
  std::set<std::string> seen;
  for (const GraphNode& node : nodes) {
    if (node.name.empty() || node.name == "$in") {
      throw input_error("graph node with reserved or empty name");
    }
    if (!seen.insert(node.name).second) {
      throw input_error("duplicate graph node name '" + node.name + "'");
    }
    if (node.inputs.empty()) {
      throw input_error("graph node '" + node.name + "' has no input");
    }
    if (node.kind != NodeKind::Concat && node.inputs.size() != 1) {
      throw input_error("graph node '" + node.name + "' takes exactly one input");
    }
    for (const auto& src : node.inputs) {
      if (src != "$in" && !seen.contains(src)) {
        throw input_error("graph node '" + node.name + "' consumes '" + src +
                          "' before it is defined");
      }
    }
    if (node.kind == NodeKind::Conv && node.out_channels < 1) {
      throw input_error("graph node '" + node.name + "': conv needs out channels");
    }
    if (node.kind == NodeKind::Linear && node.out_features < 1) {
      throw input_error("graph node '" + node.name + "': linear needs out features");
    }
    if ((node.kind == NodeKind::Conv || node.kind == NodeKind::Pool) &&
        (node.kernel_h < 1 || node.kernel_w < 1 || node.stride < 1 || node.padding < 0)) {
      throw input_error("graph node '" + node.name + "': bad kernel/stride/padding");
    }
    if (node.kind == NodeKind::Se && node.reduction < 1) {
      throw input_error("graph node '" + node.name + "': reduction must be >= 1");
    }
    if (node.kind == NodeKind::Upsample && node.scale < 1) {
      throw input_error("graph node '" + node.name + "': scale must be >= 1");
    }
    if (node.groups < 1) {
      throw input_error("graph node '" + node.name + "': groups must be >= 1");
    }
  }
}

std::vector<std::vector<int64_t>> resolve_shapes(const GraphIR& graph,
                                                 const std::vector<int64_t>& input_shape) {
  std::vector<std::vector<int64_t>> out;
  for (auto& rn : resolve_all(graph, input_shape)) out.push_back(std::move(rn.output_shape));
  return out;
}

ParamCount count_params(const GraphIR& graph, int input_channels) {
  if (input_channels < 1) throw input_error("count_params: input channels must be >= 1");
  // Spatial extent does not affect parameters; propagate with a dummy size
  // large enough for any kernel in the graph.
  int64_t probe = 1;
  for (const auto& node : graph.nodes) {
    probe = std::max<int64_t>(probe, std::max(node.kernel_h, node.kernel_w));
  }
  const auto resolved = resolve_all(graph, {input_channels, probe, probe});

  ParamCount out;
  out.per_node.reserve(graph.nodes.size());
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const uint64_t p =
        node_params(graph.nodes[i], channels_of(resolved[i].input_shapes[0]));
    out.per_node.push_back(p);
    out.total += p;
  }
  return out;
}

CostReport count_flops(const GraphIR& graph, const std::vector<int64_t>& input_shape) {
  const auto resolved = resolve_all(graph, input_shape);

  CostReport report;
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const GraphNode& node = graph.nodes[i];
    const auto& in0 = resolved[i].input_shapes[0];
    const auto& out_shape = resolved[i].output_shape;
    NodeCost cost;
    cost.name = node.name;
    cost.params = node_params(node, in0[0]);

    const uint64_t out_elems = static_cast<uint64_t>(flat_size(out_shape));
    switch (node.kind) {
      case NodeKind::Conv: {
        const uint64_t k = static_cast<uint64_t>(node.kernel_h) * node.kernel_w;
        cost.macs = k * static_cast<uint64_t>(in0[0] / node.groups) * node.out_channels *
                    static_cast<uint64_t>(out_shape[1]) * out_shape[2];
        if (node.bias) cost.elementwise = out_elems;  // bias adds
        break;
      }
      case NodeKind::Linear: {
        cost.macs = static_cast<uint64_t>(flat_size(in0)) * node.out_features;
        if (node.bias) cost.elementwise = static_cast<uint64_t>(node.out_features);
        break;
      }
      case NodeKind::Pool:
      case NodeKind::Activation:
      case NodeKind::Upsample:
        cost.elementwise = out_elems;  // one op per output element
        break;
      case NodeKind::Se: {
        const uint64_t c = static_cast<uint64_t>(in0[0]);
        const uint64_t hw = static_cast<uint64_t>(in0[1]) * in0[2];
        const uint64_t m = se_mid(in0[0], node.reduction);
        cost.macs = c * m + m * c;        // the two linear maps
        cost.elementwise = c * hw * 2;    // squeeze reduction + channel scaling
        break;
      }
      case NodeKind::Concat:
        break;  // pure data movement
    }
    cost.flops = 2 * cost.macs + cost.elementwise;

    report.params += cost.params;
    report.macs += cost.macs;
    report.elementwise += cost.elementwise;
    report.flops += cost.flops;
    report.nodes.push_back(std::move(cost));
  }
  report.gflops = static_cast<double>(report.flops) / 1e9;
  return report;
}

uint64_t storage_cost(const GraphIR& graph, int input_channels, int bytes_per_param,
                      uint64_t header_overhead) {
  if (bytes_per_param != 2 && bytes_per_param != 4 && bytes_per_param != 8) {
    throw input_error("storage_cost: bytes_per_param must be 2, 4 or 8");
  }
  return count_params(graph, input_channels).total * bytes_per_param + header_overhead;
}

CostReport analyze_graph(const GraphIR& graph, const std::vector<int64_t>& input_shape,
                         int bytes_per_param, uint64_t header_overhead) {
  CostReport report = count_flops(graph, input_shape);
  report.storage_bytes = storage_cost(graph, static_cast<int>(input_shape[0]),
                                      bytes_per_param, header_overhead);
  return report;
}

GraphIR parse_graph(const std::string& text) {
  GraphIR graph;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;

    std::istringstream ss(line);
    std::string name, kind_tag;
    ss >> name >> kind_tag;
    if (name.empty() || kind_tag.empty()) {
      throw input_error("graph line " + std::to_string(line_no) + ": expected 'name kind ...'");
    }
    GraphNode node;
    node.name = name;
    node.kind = node_kind_from_string(kind_tag);

    std::string kv;
    bool have_input = false;
    while (ss >> kv) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw input_error("graph line " + std::to_string(line_no) + ": expected key=value, got '" +
                          kv + "'");
      }
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "input") {
        node.inputs = split(value, ',');
        have_input = true;
      } else if (key == "k") {
        node.kernel_h = node.kernel_w = static_cast<int>(parse_i64(value));
      } else if (key == "kh") {
        node.kernel_h = static_cast<int>(parse_i64(value));
      } else if (key == "kw") {
        node.kernel_w = static_cast<int>(parse_i64(value));
      } else if (key == "s") {
        node.stride = static_cast<int>(parse_i64(value));
      } else if (key == "p") {
        node.padding = static_cast<int>(parse_i64(value));
      } else if (key == "out") {
        node.out_channels = static_cast<int>(parse_i64(value));
        node.out_features = node.out_channels;
      } else if (key == "groups") {
        node.groups = static_cast<int>(parse_i64(value));
      } else if (key == "bias") {
        node.bias = parse_i64(value) != 0;
      } else if (key == "r") {
        node.reduction = static_cast<int>(parse_i64(value));
      } else if (key == "scale") {
        node.scale = static_cast<int>(parse_i64(value));
      } else {
        throw input_error("graph line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    }
    if (!have_input) {
      throw input_error("graph line " + std::to_string(line_no) + ": missing input=");
    }
    graph.nodes.push_back(std::move(node));
  }
  graph.validate();
  return graph;
}

std::string graph_to_text(const GraphIR& graph) {
  std::string out;
  for (const GraphNode& node : graph.nodes) {
    out += node.name + " " + to_string(node.kind);
    switch (node.kind) {
      case NodeKind::Conv:
        out += " k=" + std::to_string(node.kernel_h) + " s=" + std::to_string(node.stride) +
               " p=" + std::to_string(node.padding) + " out=" + std::to_string(node.out_channels);
        if (node.groups != 1) out += " groups=" + std::to_string(node.groups);
        if (!node.bias) out += " bias=0";
        break;
      case NodeKind::Pool:
        out += " k=" + std::to_string(node.kernel_h) + " s=" + std::to_string(node.stride) +
               " p=" + std::to_string(node.padding);
        break;
      case NodeKind::Linear:
        out += " out=" + std::to_string(node.out_features);
        if (!node.bias) out += " bias=0";
        break;
      case NodeKind::Se:
        out += " r=" + std::to_string(node.reduction);
        break;
      case NodeKind::Upsample:
        out += " scale=" + std::to_string(node.scale);
        break;
      case NodeKind::Activation:
      case NodeKind::Concat:
        break;
    }
    out += " input=";
    for (size_t i = 0; i < node.inputs.size(); ++i) {
      if (i) out += ",";
      out += node.inputs[i];
    }
    out += "\n";
  }
  return out;
}

std::string cost_report_csv(const CostReport& report) {
  std::string out = "node,params,macs,elementwise,flops\n";
  for (const auto& n : report.nodes) {
    out += n.name + "," + fmt_u64(n.params) + "," + fmt_u64(n.macs) + "," +
           fmt_u64(n.elementwise) + "," + fmt_u64(n.flops) + "\n";
  }
  out += "total," + fmt_u64(report.params) + "," + fmt_u64(report.macs) + "," +
         fmt_u64(report.elementwise) + "," + fmt_u64(report.flops) + "\n";
  return out;
}

std::string cost_report_table(const CostReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"node", "params", "MACs", "elementwise", "FLOPs"});
  for (const auto& n : report.nodes) {
    rows.push_back({n.name, fmt_u64(n.params), fmt_u64(n.macs), fmt_u64(n.elementwise),
                    fmt_u64(n.flops)});
  }
  rows.push_back({"total", fmt_u64(report.params), fmt_u64(report.macs),
                  fmt_u64(report.elementwise), fmt_u64(report.flops)});

  std::array<size_t, 5> width{};
  for (const auto& row : rows) {
    for (size_t i = 0; i < 5; ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (size_t i = 0; i < 5; ++i) {
      std::string cell = row[i];
      cell.resize(width[i], ' ');
      out += cell;
      out += i + 1 < 5 ? "  " : "";
    }
    out += "\n";
  }
  out += "GFLOPs: " + fmt_double(report.gflops) + "\n";
  if (report.storage_bytes > 0) {
    out += "storage bytes: " + fmt_u64(report.storage_bytes) + "\n";
  }
  return out;
}

}  // namespace detbench
