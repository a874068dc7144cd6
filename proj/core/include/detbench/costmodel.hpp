#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace detbench {

enum class NodeKind { Conv, Linear, Pool, Activation, Se, Upsample, Concat };

NodeKind node_kind_from_string(const std::string& tag);  // throws input_error
std::string to_string(NodeKind kind);

struct GraphNode {
  std::string name;
  NodeKind kind = NodeKind::Activation;
  std::vector<std::string> inputs;  // node names; "$in" is the graph input

  // conv / pool
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int out_channels = 0;  // conv only
  int groups = 1;
  bool bias = true;
  // se
  int reduction = 16;
  // upsample
  int scale = 2;
  // linear
  int out_features = 0;
};

// Ordered layer list; a node may only consume the graph input or earlier
// nodes, which keeps the graph acyclic by construction.
struct GraphIR {
  std::vector<GraphNode> nodes;

  void validate() const;  // throws input_error
};

struct NodeCost {
  std::string name;
  uint64_t params = 0;
  uint64_t macs = 0;
  uint64_t elementwise = 0;  // bias adds, activations, pooling, scaling
  uint64_t flops = 0;        // 2*macs + elementwise
};

struct CostReport {
  std::vector<NodeCost> nodes;
  uint64_t params = 0;
  uint64_t macs = 0;
  uint64_t elementwise = 0;
  uint64_t flops = 0;
  double gflops = 0.0;
  uint64_t storage_bytes = 0;
};

// Propagates the input shape through the graph; one output shape per node.
// Conv/pool use floor((d + 2p - k)/s) + 1; a non-positive result raises an
// input_error naming the node.
std::vector<std::vector<int64_t>> resolve_shapes(const GraphIR& graph,
                                                 const std::vector<int64_t>& input_shape);

// Parameter counts need channel propagation but not spatial sizes, so only
// the graph input channel count is required.
struct ParamCount {
  std::vector<uint64_t> per_node;
  uint64_t total = 0;
};
ParamCount count_params(const GraphIR& graph, int input_channels);

// MACs and FLOPs for one forward pass at the given [C,H,W] input. FLOPs are
// reported as 2*MACs plus one op per element for bias adds, activations,
// pooling, upsampling and the SE squeeze/scale stages; both numbers are kept
// so either convention can be compared against.
CostReport count_flops(const GraphIR& graph, const std::vector<int64_t>& input_shape);

// Predicted weight-file size: params * bytes_per_param + header_overhead.
uint64_t storage_cost(const GraphIR& graph, int input_channels, int bytes_per_param,
                      uint64_t header_overhead);

// Full report in one pass.
CostReport analyze_graph(const GraphIR& graph, const std::vector<int64_t>& input_shape,
                         int bytes_per_param = 4, uint64_t header_overhead = 0);

// Line-oriented text format, one node per line:
//   name kind key=value ... input=<name|$in>[,more]
// '#' starts a comment. Unknown keys are an input_error.
GraphIR parse_graph(const std::string& text);
std::string graph_to_text(const GraphIR& graph);

// Renders a report as CSV (one row per node plus a total row) and as an
// aligned human-readable table.
std::string cost_report_csv(const CostReport& report);
std::string cost_report_table(const CostReport& report);

}  // namespace detbench
