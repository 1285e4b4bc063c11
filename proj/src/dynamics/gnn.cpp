#include "compnerf/dynamics/gnn.hpp"

#include <algorithm>

namespace compnerf::dynamics {

AdjacencyMode adjacency_mode_from_string(const std::string& s) {
  if (s == "in_loop") return AdjacencyMode::kInLoop;
  if (s == "once_per_step") return AdjacencyMode::kOncePerStep;
  if (s == "dense") return AdjacencyMode::kDense;
  fail("unknown adjacency mode '" + s + "' (in_loop|once_per_step|dense)");
}

std::string to_string(AdjacencyMode m) {
  switch (m) {
    case AdjacencyMode::kInLoop: return "in_loop";
    case AdjacencyMode::kOncePerStep: return "once_per_step";
    case AdjacencyMode::kDense: return "dense";
  }
  return "?";
}

Tensor GraphNets::edge_feature(const Tensor& zi, const Tensor& zj) const {
  Tensor row = concat_cols({reshape(zi, {1, latent_dim}), reshape(zj, {1, latent_dim})});
  return reshape(edge_net(row), {edge_dim});
}

void GraphNets::collect(NamedParams& out) const {
  edge_net.collect("gnn.edge", out);
  node_net.collect("gnn.node", out);
}

GraphNets make_graph_nets(int64_t latent_dim, int64_t hidden, int64_t edge_dim, Rng& rng) {
  GraphNets g;
  g.latent_dim = latent_dim;
  g.edge_dim = edge_dim;
  g.edge_net = make_mlp({2 * latent_dim, hidden, hidden, hidden, edge_dim}, rng);
  g.node_net = make_mlp({latent_dim + edge_dim, hidden, hidden, hidden, latent_dim}, rng);
  return g;
}

AdjacencyFn dense_adjacency(size_t m) {
  return [m](const std::vector<Tensor>&) {
    decoder::AdjacencyMatrix a(m * m, 1);
    for (size_t i = 0; i < m; ++i) a[i * m + i] = 0;
    return a;
  };
}

PropagateResult propagate(const GraphNets& nets, const std::vector<Tensor>& z,
                          int articulated, const DynamicsConfig& cfg,
                          const AdjacencyFn& adjacency) {
  const size_t m = z.size();
  check(articulated >= 0 && size_t(articulated) < m,
        "propagate: articulated index out of range");
  check(cfg.message_passes >= 1, "propagate: L must be >= 1");
  PropagateResult out;
  out.interacted.assign(m, 0);
  if (m == 1) {
    out.latents = z;  // nothing to propagate
    return out;
  }

  const int64_t k = nets.latent_dim;
  std::vector<Tensor> cur = z;
  decoder::AdjacencyMatrix adj;
  if (cfg.adjacency_mode != AdjacencyMode::kInLoop) adj = adjacency(cur);

  for (int64_t pass = 0; pass < cfg.message_passes; ++pass) {
    if (cfg.adjacency_mode == AdjacencyMode::kInLoop) adj = adjacency(cur);
    check(adj.size() == m * m, "propagate: adjacency size mismatch");
    out.adjacency_per_pass.push_back(adj);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j)
        if (i != j && adj[i * m + j]) out.interacted[i] = 1;

    // Edge features for the active pairs (receiver i, sender j).
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < m; ++i) {
      if (int(i) == articulated) continue;
      for (size_t j = 0; j < m; ++j)
        if (j != i && adj[i * m + j]) pairs.emplace_back(i, j);
    }
    Tensor edges;
    if (!pairs.empty()) {
      std::vector<Tensor> lhs, rhs;
      for (const auto& [i, j] : pairs) {
        lhs.push_back(reshape(cur[i], {1, k}));
        rhs.push_back(reshape(cur[j], {1, k}));
      }
      edges = nets.edge_net(concat_cols({concat_rows(lhs), concat_rows(rhs)}));
    }

    // Node updates, batched over the non-frozen objects. F_z receives the
    // pre-step latent, not the current pass value.
    std::vector<size_t> nodes;
    std::vector<Tensor> prev_rows, msg_rows;
    const Tensor zero_msg = Tensor::zeros({1, nets.edge_dim});
    for (size_t i = 0; i < m; ++i) {
      if (int(i) == articulated) continue;
      nodes.push_back(i);
      prev_rows.push_back(reshape(z[i], {1, k}));
      Tensor msg;
      for (size_t p = 0; p < pairs.size(); ++p) {
        if (pairs[p].first != i) continue;
        Tensor e = slice_rows(edges, int64_t(p), int64_t(p) + 1);
        msg = msg.defined() ? add(msg, e) : e;
      }
      msg_rows.push_back(msg.defined() ? msg : zero_msg);
    }
    if (!nodes.empty()) {
      Tensor updated =
          nets.node_net(concat_cols({concat_rows(prev_rows), concat_rows(msg_rows)}));
      std::vector<Tensor> next = cur;
      for (size_t idx = 0; idx < nodes.size(); ++idx)
        next[nodes[idx]] =
            reshape(slice_rows(updated, int64_t(idx), int64_t(idx) + 1), {k});
      cur = std::move(next);
    }
  }

  if (cfg.quasi_static) {
    // Objects whose adjacency row stayed empty at every pass keep their
    // pre-step latent bit-identically.
    for (size_t i = 0; i < m; ++i)
      if (int(i) != articulated && !out.interacted[i]) cur[i] = z[i];
  }
  out.latents = std::move(cur);
  return out;
}

GnnTrainReport train_gnn(GraphNets& nets, const std::vector<LatentTrajectory>& data,
                         const DynamicsConfig& cfg, AdamState& adam, int iterations,
                         int batch_pairs, Rng& rng,
                         const std::function<void(int, double)>& on_iteration) {
  GnnTrainReport report;
  std::vector<std::pair<size_t, size_t>> transitions;  // (trajectory, t)
  for (size_t s = 0; s < data.size(); ++s) {
    if (data[s].frames.size() < 2) {
      report.skipped_short += 1;
      continue;
    }
    check(data[s].transition_adjacency.size() + 1 == data[s].frames.size(),
          "train_gnn: trajectory lacks per-transition adjacency");
    for (size_t t = 0; t + 1 < data[s].frames.size(); ++t) transitions.emplace_back(s, t);
  }
  check(!transitions.empty(), "train_gnn: no usable transitions in the dataset");

  NamedParams named;
  nets.collect(named);
  std::vector<Tensor> params;
  for (auto& [name, p] : named) params.push_back(p);

  DynamicsConfig train_cfg = cfg;
  train_cfg.adjacency_mode = AdjacencyMode::kOncePerStep;

  for (int it = 0; it < iterations; ++it) {
    zero_grads(params);
    Tape tape;
    double loss_value = 0;
    {
      TapeScope scope(&tape);
      Tensor loss;
      for (int b = 0; b < batch_pairs; ++b) {
        const auto [s, t] = transitions[size_t(rng.randint(int64_t(transitions.size())))];
        const auto& traj = data[s];
        std::vector<Tensor> input = traj.frames[t];
        // Action-free convention: the articulated latent at t is replaced by
        // its observed encoding at t+1.
        input[traj.articulated] = traj.frames[t + 1][traj.articulated];
        const decoder::AdjacencyMatrix adj = traj.transition_adjacency[t];
        PropagateResult pred = propagate(
            nets, input, traj.articulated, train_cfg,
            [&adj](const std::vector<Tensor>&) { return adj; });
        for (size_t i = 0; i < input.size(); ++i) {
          if (int(i) == traj.articulated) continue;
          Tensor d = sub(pred.latents[i], traj.frames[t + 1][i]);
          Tensor sq = mean(mul(d, d));
          loss = loss.defined() ? add(loss, sq) : sq;
        }
      }
      loss = scale(loss, real(1) / real(batch_pairs));
      loss_value = double(loss.item());
      backward(tape, loss);
    }
    adam_step(params, adam);
    report.losses.push_back(loss_value);
    if (on_iteration) on_iteration(it, loss_value);
  }
  return report;
}

}  // namespace compnerf::dynamics
