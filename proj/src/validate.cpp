#include "ccsim/validate.hpp"

#include <algorithm>
#include <sstream>

namespace ccsim {

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (ok ? "OK" : "INVALID") << " (" << issues.size() << " issue(s))\n";
  for (const auto& i : issues)
    os << "  node " << i.node << " instr " << i.instr << ": " << i.what << "\n";
  return os.str();
}

namespace {

// Linear tree holding one root-to-terminal path of the original.
ProtocolTree chain_of(const ProtocolTree& tree, const std::vector<int>& path) {
  ProtocolTree chain;
  chain.n_qubits = tree.n_qubits;
  chain.meta = tree.meta;
  for (size_t i = 0; i < path.size(); i++) {
    TreeNode node;
    node.name = tree.nodes[path[i]].name;
    node.circuit = tree.nodes[path[i]].circuit;
    if (i + 1 < path.size())
      node.edges.push_back({Predicate::always(), (int)i + 1});
    else
      node.terminal = Terminal{"end", nullptr, {}};
    chain.nodes.push_back(std::move(node));
  }
  return chain;
}

}  // namespace

ValidationReport validate_tree(const ProtocolTree& tree, int shots_per_path, uint64_t seed) {
  ValidationReport rep;
  CompiledTree whole = compile_tree(tree);  // structural checks

  // Out-edge predicates must partition random records.
  {
    StreamRng rng(mix_key(seed, 0x76616c69));
    for (size_t n = 0; n < tree.nodes.size(); n++) {
      const TreeNode& tn = tree.nodes[n];
      if (tn.edges.empty()) continue;
      std::vector<std::pair<std::string, int>> bits(whole.nodes[n].bit_index.begin(),
                                                    whole.nodes[n].bit_index.end());
      for (int trial = 0; trial < 512; trial++) {
        std::vector<uint32_t> set_bits;
        for (auto& [name, idx] : bits)
          if (rng.bits() & 1) set_bits.push_back((uint32_t)idx);
        std::sort(set_bits.begin(), set_bits.end());
        int taken = 0;
        for (const auto& e : tn.edges) taken += eval_predicate(e.when, whole, (int)n, set_bits);
        if (taken != 1) {
          rep.ok = false;
          rep.issues.push_back({(int)n, -1,
                                "out-edge predicates satisfied " + std::to_string(taken) +
                                    " times on a random record"});
          break;
        }
      }
    }
  }

  // Per-path determinism under frame randomization.
  for (const auto& path : enumerate_paths(tree)) {
    ProtocolTree chain = chain_of(tree, path);
    CompiledTree ct = compile_tree(chain);
    DenseSimulator sim(ct, seed);
    sim.set_randomize_frames(true);
    sim.set_noise_off(true);

    // Absolute record index -> (node in path, instr, declared random).
    struct BitInfo {
      int node, instr;
      bool random;
      bool varied = false;
    };
    std::vector<BitInfo> bit_info;
    for (size_t i = 0; i < chain.nodes.size(); i++) {
      for (size_t k = 0; k < chain.nodes[i].circuit.instrs.size(); k++) {
        const Instruction& ins = chain.nodes[i].circuit.instrs[k];
        if (ins.kind == InstrKind::MEASURE)
          bit_info.push_back({path[i], (int)k, ins.random_outcome});
      }
    }

    struct Det {
      size_t i, k;
      std::vector<uint32_t> idxs;
      bool violated = false;
    };
    std::vector<Det> dets;
    int last = (int)chain.nodes.size() - 1;
    for (size_t i = 0; i < chain.nodes.size(); i++) {
      for (size_t k = 0; k < chain.nodes[i].circuit.instrs.size(); k++) {
        const Instruction& ins = chain.nodes[i].circuit.instrs[k];
        if (ins.kind != InstrKind::DETECTOR) continue;
        Det d{i, k, {}, false};
        for (const auto& b : ins.parity_bits) d.idxs.push_back((uint32_t)ct.resolve(last, b));
        dets.push_back(std::move(d));
      }
    }

    std::vector<bool> det_violated(bit_info.size(), false);
    for (int s = 0; s < shots_per_path; s++) {
      TerminalResult res = sim.run_shot((uint64_t)s);
      for (uint32_t idx : res.record) {
        if (bit_info[idx].random)
          bit_info[idx].varied = true;
        else
          det_violated[idx] = true;
      }
      for (Det& d : dets) {
        if (d.violated) continue;
        int par = 0;
        for (uint32_t idx : d.idxs)
          par ^= std::binary_search(res.record.begin(), res.record.end(), idx);
        if (par) d.violated = true;
      }
    }
    for (size_t idx = 0; idx < bit_info.size(); idx++) {
      if (det_violated[idx]) {
        rep.ok = false;
        rep.issues.push_back({bit_info[idx].node, bit_info[idx].instr,
                              "declared-deterministic bit flipped under frame randomization"});
      }
    }
    for (const Det& d : dets) {
      if (!d.violated) continue;
      rep.ok = false;
      rep.issues.push_back(
          {path[d.i], (int)d.k,
           "detector '" + chain.nodes[d.i].circuit.instrs[d.k].label +
               "' parity not deterministic"});
    }
  }
  return rep;
}

}  // namespace ccsim
