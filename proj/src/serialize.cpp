#include "ccsim/serialize.hpp"

#include <json.hpp>

#include "ccsim/decoder.hpp"

namespace ccsim {

using nlohmann::json;

namespace {

const char* kFormatTag = "ccsim-tree/1";

json pred_to_json(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::TRUE_:
      return json{{"op", "true"}};
    case Predicate::Kind::PARITY:
      return json{{"op", "parity"}, {"bits", p.bits}, {"eq", p.eq}};
    case Predicate::Kind::XOR:
    case Predicate::Kind::ANY:
    case Predicate::Kind::ALL: {
      json args = json::array();
      for (const auto& a : p.args) args.push_back(pred_to_json(a));
      const char* op = p.kind == Predicate::Kind::XOR ? "xor"
                       : p.kind == Predicate::Kind::ANY ? "any"
                                                        : "all";
      return json{{"op", op}, {"args", args}};
    }
    case Predicate::Kind::NOT_:
      return json{{"op", "not"}, {"arg", pred_to_json(p.args[0])}};
  }
  return {};
}

Predicate pred_from_json(const json& j) {
  std::string op = j.at("op");
  if (op == "true") return Predicate::always();
  if (op == "parity")
    return Predicate::parity(j.at("bits").get<std::vector<std::string>>(), j.at("eq").get<int>());
  if (op == "not") return Predicate::negate(pred_from_json(j.at("arg")));
  std::vector<Predicate> args;
  for (const auto& a : j.at("args")) args.push_back(pred_from_json(a));
  if (op == "xor") return Predicate::xor_of(std::move(args));
  if (op == "any") return Predicate::any_of(std::move(args));
  if (op == "all") return Predicate::all_of(std::move(args));
  throw std::invalid_argument("unknown predicate op: " + op);
}

std::vector<int> mask_to_list(Bits m) {
  std::vector<int> out;
  for (int q = 0; q < 64; q++)
    if (m >> q & 1) out.push_back(q);
  return out;
}

Bits list_to_mask(const json& j) {
  Bits m = 0;
  for (int q : j.get<std::vector<int>>()) m |= Bits{1} << q;
  return m;
}

const char* channel_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::DEPOL1: return "depol1";
    case ChannelKind::DEPOL2: return "depol2";
    case ChannelKind::X_FLIP: return "x_flip";
    case ChannelKind::Z_FLIP: return "z_flip";
  }
  return "?";
}

ChannelKind channel_from_name(const std::string& s) {
  if (s == "depol1") return ChannelKind::DEPOL1;
  if (s == "depol2") return ChannelKind::DEPOL2;
  if (s == "x_flip") return ChannelKind::X_FLIP;
  if (s == "z_flip") return ChannelKind::Z_FLIP;
  throw std::invalid_argument("unknown channel kind: " + s);
}

const char* gate_name(GateKind g) {
  switch (g) {
    case GateKind::I: return "I";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::S_DAG: return "S_DAG";
    case GateKind::SQRT_X: return "SQRT_X";
    case GateKind::SQRT_X_DAG: return "SQRT_X_DAG";
    case GateKind::SQRT_Y: return "SQRT_Y";
    case GateKind::SQRT_Y_DAG: return "SQRT_Y_DAG";
    case GateKind::CX: return "CX";
    case GateKind::CZ: return "CZ";
    case GateKind::SWAP: return "SWAP";
    case GateKind::XX_PI2: return "XX_PI2";
    case GateKind::ZZ_PI2: return "ZZ_PI2";
  }
  return "?";
}

GateKind gate_from_name(const std::string& s) {
  static const std::map<std::string, GateKind> m = {
      {"I", GateKind::I},
      {"X", GateKind::X},
      {"Y", GateKind::Y},
      {"Z", GateKind::Z},
      {"H", GateKind::H},
      {"S", GateKind::S},
      {"S_DAG", GateKind::S_DAG},
      {"SQRT_X", GateKind::SQRT_X},
      {"SQRT_X_DAG", GateKind::SQRT_X_DAG},
      {"SQRT_Y", GateKind::SQRT_Y},
      {"SQRT_Y_DAG", GateKind::SQRT_Y_DAG},
      {"CX", GateKind::CX},
      {"CZ", GateKind::CZ},
      {"SWAP", GateKind::SWAP},
      {"XX_PI2", GateKind::XX_PI2},
      {"ZZ_PI2", GateKind::ZZ_PI2},
  };
  auto it = m.find(s);
  if (it == m.end()) throw std::invalid_argument("unknown gate: " + s);
  return it->second;
}

json instr_to_json(const Instruction& ins) {
  json j;
  j["layer"] = ins.layer;
  switch (ins.kind) {
    case InstrKind::GATE:
      j["op"] = "gate";
      j["g"] = gate_name(ins.gate);
      j["q"] = ins.q1 >= 0 ? std::vector<int>{ins.q0, ins.q1} : std::vector<int>{ins.q0};
      break;
    case InstrKind::RESET:
      j["op"] = "reset";
      j["basis"] = ins.basis == MeasureBasis::Z ? "Z" : "X";
      j["q"] = ins.q0;
      if (ins.p > 0) j["flip_p"] = ins.p;
      break;
    case InstrKind::MEASURE:
      j["op"] = "measure";
      j["basis"] = ins.basis == MeasureBasis::Z ? "Z" : "X";
      j["q"] = ins.q0;
      j["bit"] = ins.label;
      j["random"] = ins.random_outcome;
      if (ins.p > 0) j["flip_p"] = ins.p;
      break;
    case InstrKind::CHANNEL:
      j["op"] = "channel";
      j["kind"] = channel_name(ins.channel);
      j["p"] = ins.p;
      j["q"] = ins.q1 >= 0 ? std::vector<int>{ins.q0, ins.q1} : std::vector<int>{ins.q0};
      break;
    case InstrKind::IDLE:
      j["op"] = "idle";
      j["q"] = ins.q0;
      j["t"] = ins.duration_s;
      break;
    case InstrKind::DETECTOR:
      j["op"] = "detector";
      j["name"] = ins.label;
      j["bits"] = ins.parity_bits;
      break;
    case InstrKind::COND_PAULI:
      j["op"] = "cond_pauli";
      j["when"] = pred_to_json(*ins.cond);
      j["x"] = mask_to_list(ins.pauli_x);
      j["z"] = mask_to_list(ins.pauli_z);
      break;
    case InstrKind::LOOKUP_CORR: {
      j["op"] = "lookup";
      json rows = json::array();
      for (int s = 0; s < 8; s++) {
        json row = json::array();
        for (int c = 0; c < 4; c++) row.push_back(ins.lookup->table->entry[s][c]);
        rows.push_back(row);
      }
      j["table"] = rows;
      j["synd"] = ins.lookup->syndrome_bits;
      j["flags"] = ins.lookup->flag_bits;
      j["targets"] = ins.lookup->targets;
      j["letter"] = std::string(1, ins.lookup->letter);
      if (!ins.lookup->syndrome_exprs.empty()) {
        json ex = json::array();
        for (const auto& e : ins.lookup->syndrome_exprs) ex.push_back(pred_to_json(e));
        j["synd_exprs"] = ex;
      }
      if (ins.lookup->enable) j["enable"] = pred_to_json(*ins.lookup->enable);
      break;
    }
  }
  return j;
}

Instruction instr_from_json(const json& j) {
  Instruction ins;
  ins.layer = (uint16_t)j.value("layer", 0);
  std::string op = j.at("op");
  if (op == "gate") {
    ins.kind = InstrKind::GATE;
    ins.gate = gate_from_name(j.at("g"));
    auto q = j.at("q").get<std::vector<int>>();
    ins.q0 = q.at(0);
    ins.q1 = q.size() > 1 ? q[1] : -1;
  } else if (op == "reset") {
    ins.kind = InstrKind::RESET;
    ins.basis = j.at("basis") == "Z" ? MeasureBasis::Z : MeasureBasis::X;
    ins.q0 = j.at("q");
    ins.p = j.value("flip_p", 0.0);
  } else if (op == "measure") {
    ins.kind = InstrKind::MEASURE;
    ins.basis = j.at("basis") == "Z" ? MeasureBasis::Z : MeasureBasis::X;
    ins.q0 = j.at("q");
    ins.label = j.at("bit");
    ins.random_outcome = j.value("random", false);
    ins.p = j.value("flip_p", 0.0);
  } else if (op == "channel") {
    ins.kind = InstrKind::CHANNEL;
    ins.channel = channel_from_name(j.at("kind"));
    ins.p = j.at("p");
    auto q = j.at("q").get<std::vector<int>>();
    ins.q0 = q.at(0);
    ins.q1 = q.size() > 1 ? q[1] : -1;
  } else if (op == "idle") {
    ins.kind = InstrKind::IDLE;
    ins.q0 = j.at("q");
    ins.duration_s = j.at("t");
  } else if (op == "detector") {
    ins.kind = InstrKind::DETECTOR;
    ins.label = j.at("name");
    ins.parity_bits = j.at("bits").get<std::vector<std::string>>();
  } else if (op == "cond_pauli") {
    ins.kind = InstrKind::COND_PAULI;
    ins.cond = std::make_shared<Predicate>(pred_from_json(j.at("when")));
    ins.pauli_x = list_to_mask(j.at("x"));
    ins.pauli_z = list_to_mask(j.at("z"));
  } else if (op == "lookup") {
    ins.kind = InstrKind::LOOKUP_CORR;
    auto info = std::make_shared<LookupCorrInfo>();
    auto table = std::make_shared<LookupTable>();
    for (int s = 0; s < 8; s++)
      for (int c = 0; c < 4; c++) table->entry[s][c] = j.at("table")[s][c].get<uint8_t>();
    info->table = table;
    info->syndrome_bits = j.at("synd").get<std::vector<std::string>>();
    info->flag_bits = j.at("flags").get<std::vector<std::string>>();
    info->targets = j.at("targets").get<std::vector<int>>();
    info->letter = j.at("letter").get<std::string>().at(0);
    if (j.contains("synd_exprs"))
      for (const auto& e : j.at("synd_exprs")) info->syndrome_exprs.push_back(pred_from_json(e));
    if (j.contains("enable"))
      info->enable = std::make_shared<Predicate>(pred_from_json(j.at("enable")));
    ins.lookup = info;
  } else {
    throw std::invalid_argument("unknown instruction op: " + op);
  }
  return ins;
}

}  // namespace

std::string tree_to_json(const ProtocolTree& tree) {
  json j;
  j["format"] = kFormatTag;
  j["n_qubits"] = tree.n_qubits;
  json meta;
  meta["kind"] = tree.meta.kind;
  meta["state"] = to_string(tree.meta.state);
  meta["dest_data"] = tree.meta.dest_data;
  meta["source_data"] = tree.meta.source_data;
  meta["post_selected"] = tree.meta.post_selected;
  meta["ft_tagged"] = tree.meta.ft_tagged;
  meta["data_qubits"] = tree.meta.data_qubits;
  meta["syndrome_qubits"] = tree.meta.syndrome_qubits;
  meta["flag_qubits"] = tree.meta.flag_qubits;
  meta["surgery_qubits"] = tree.meta.surgery_qubits;
  j["meta"] = meta;
  json nodes = json::array();
  for (const auto& node : tree.nodes) {
    json n;
    n["name"] = node.name;
    json instrs = json::array();
    for (const auto& ins : node.circuit.instrs) instrs.push_back(instr_to_json(ins));
    n["circuit"] = instrs;
    json edges = json::array();
    for (const auto& e : node.edges)
      edges.push_back(json{{"when", pred_to_json(e.when)}, {"next", e.next}});
    n["edges"] = edges;
    if (node.terminal) {
      json t;
      t["name"] = node.terminal->name;
      if (node.terminal->discard) t["discard"] = pred_to_json(*node.terminal->discard);
      json outs = json::array();
      for (const auto& o : node.terminal->outputs)
        outs.push_back(
            json{{"name", o.name}, {"value", pred_to_json(o.value)}, {"dress", o.dress_random}});
      t["outputs"] = outs;
      n["terminal"] = t;
    }
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j.dump(1);
}

ProtocolTree tree_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format") != kFormatTag)
    throw std::invalid_argument("unsupported tree format version");
  ProtocolTree tree;
  tree.n_qubits = j.at("n_qubits");
  const json& meta = j.at("meta");
  tree.meta.kind = meta.at("kind");
  tree.meta.state = cardinal_from_string(meta.at("state"));
  tree.meta.dest_data = meta.at("dest_data").get<std::vector<int>>();
  tree.meta.source_data = meta.at("source_data").get<std::vector<int>>();
  tree.meta.post_selected = meta.at("post_selected");
  tree.meta.ft_tagged = meta.at("ft_tagged");
  tree.meta.data_qubits = meta.at("data_qubits").get<std::vector<int>>();
  tree.meta.syndrome_qubits = meta.at("syndrome_qubits").get<std::vector<int>>();
  tree.meta.flag_qubits = meta.at("flag_qubits").get<std::vector<int>>();
  tree.meta.surgery_qubits = meta.at("surgery_qubits").get<std::vector<int>>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.name = n.at("name");
    node.circuit.n_qubits = tree.n_qubits;
    for (const auto& i : n.at("circuit")) node.circuit.instrs.push_back(instr_from_json(i));
    for (const auto& e : n.at("edges"))
      node.edges.push_back({pred_from_json(e.at("when")), e.at("next").get<int>()});
    if (n.contains("terminal")) {
      Terminal t;
      t.name = n.at("terminal").at("name");
      if (n.at("terminal").contains("discard"))
        t.discard = std::make_shared<Predicate>(pred_from_json(n.at("terminal").at("discard")));
      for (const auto& o : n.at("terminal").at("outputs"))
        t.outputs.push_back({o.at("name"), pred_from_json(o.at("value")), o.at("dress")});
      node.terminal = t;
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

}  // namespace ccsim
