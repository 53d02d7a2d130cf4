#include "gnep/io.hpp"

#include <fstream>
#include <string>

namespace gnep {

namespace {

Json sparse_to_json(const std::vector<VectorEntry>& a) {
  Json out = Json::object();
  for (const auto& e : a) out[std::to_string(e.index)] = e.value;
  return out;
}

std::vector<VectorEntry> sparse_from_json(const Json& j) {
  if (!j.is_object()) throw StructuralError("sparse vector must be an object {index: coeff}");
  std::vector<VectorEntry> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::size_t pos = 0;
    unsigned long idx = 0;
    try {
      idx = std::stoul(it.key(), &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != it.key().size())
      throw StructuralError("sparse index '" + it.key() + "' is not a nonnegative integer");
    out.push_back({idx, it.value().get<double>()});
  }
  return out;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Json game_to_json(const QuadraticGame& game) {
  const auto& topo = game.topology();
  Json j;
  j["N"] = topo.num_agents();
  j["dims"] = topo.dims();
  Json nb = Json::array();
  for (std::size_t k = 0; k < topo.num_agents(); ++k) nb.push_back(topo.neighborhood(k));
  j["neighborhoods"] = nb;
  std::vector<double> B;
  for (Eigen::Index r = 0; r < game.B().rows(); ++r)
    for (Eigen::Index c = 0; c < game.B().cols(); ++c) B.push_back(game.B()(r, c));
  j["B"] = B;
  j["b"] = vector_to_json(game.b());

  Json noise;
  noise["kind"] = game.noise().kind == NoiseKind::none ? "none" : "additive_uniform";
  Json widths = Json::array(), dists = Json::array();
  for (const auto& d : game.noise().disturbances) {
    widths.push_back(d.half_width);
    Json dj;
    dj["half_width"] = d.half_width;
    Json mat = Json::array();
    for (const auto& e : d.matrix) mat.push_back({e.row, e.col, e.value});
    dj["matrix"] = mat;
    dj["offset"] = sparse_to_json(d.offset);
    dists.push_back(dj);
  }
  noise["half_widths"] = widths;
  noise["disturbances"] = dists;
  j["noise"] = noise;
  return j;
}

QuadraticGame game_from_json(const Json& j) {
  auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (j.contains("N") && j.at("N").get<std::size_t>() != dims.size())
    throw StructuralError("N does not match the length of dims");
  auto nb = j.at("neighborhoods").get<std::vector<std::vector<std::size_t>>>();
  Topology topo(dims, nb);
  const auto m = static_cast<Eigen::Index>(topo.total_dim());
  auto flat = j.at("B").get<std::vector<double>>();
  if (flat.size() != static_cast<std::size_t>(m * m))
    throw StructuralError("B must hold M*M = " + std::to_string(m * m) + " row-major entries");
  Matrix B(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) B(r, c) = flat[static_cast<std::size_t>(r * m + c)];
  Vector b = vector_from_json(j.at("b"));

  NoiseModel noise;
  if (j.contains("noise")) {
    const Json& nj = j.at("noise");
    const auto kind = nj.value("kind", std::string("none"));
    if (kind == "additive_uniform")
      noise.kind = NoiseKind::additive_uniform;
    else if (kind != "none")
      throw StructuralError("unknown noise kind '" + kind + "'");
    if (noise.kind != NoiseKind::none)
      for (const auto& dj : nj.value("disturbances", Json::array())) {
        Disturbance d;
        d.half_width = dj.at("half_width").get<double>();
        for (const auto& e : dj.value("matrix", Json::array()))
          d.matrix.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
        if (dj.contains("offset")) d.offset = sparse_from_json(dj.at("offset"));
        noise.disturbances.push_back(std::move(d));
      }
  }
  return QuadraticGame(std::move(topo), std::move(B), std::move(b), std::move(noise));
}

Json affine_to_json(const AffineConstraint& con) {
  return Json{{"a", sparse_to_json(con.a)}, {"c", con.c}};
}

AffineConstraint affine_from_json(const Json& j) {
  return {sparse_from_json(j.at("a")), j.at("c").get<double>()};
}

Json constraints_to_json(const ConstraintSet& cs) {
  Json eq = Json::array(), ineq = Json::array();
  for (const auto& h : cs.equalities()) eq.push_back(affine_to_json(h));
  for (const auto& g : cs.inequalities()) ineq.push_back(affine_to_json(g));
  return Json{{"equalities", eq}, {"inequalities", ineq}};
}

ConstraintSet constraints_from_json(const Json& j) {
  ConstraintSet cs;
  for (const auto& h : j.value("equalities", Json::array())) cs.add_equality(affine_from_json(h));
  for (const auto& g : j.value("inequalities", Json::array())) cs.add_inequality(affine_from_json(g));
  return cs;
}

Json cournot_to_json(const CournotSpec& spec) {
  Json edges = Json::array();
  for (auto [k, l] : spec.edges) edges.push_back({k, l});
  return Json{{"N", spec.num_factories},
              {"L", spec.num_markets},
              {"edges", edges},
              {"x", spec.x},
              {"q", spec.q},
              {"y", spec.y},
              {"h", spec.h},
              {"noise", {{"vx", spec.noise_x}, {"vy", spec.noise_y}}}};
}

CournotSpec cournot_from_json(const Json& j) {
  CournotSpec spec;
  spec.num_factories = j.at("N").get<std::size_t>();
  spec.num_markets = j.at("L").get<std::size_t>();
  for (const auto& e : j.at("edges"))
    spec.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  spec.x = j.at("x").get<std::vector<double>>();
  spec.q = j.at("q").get<std::vector<double>>();
  spec.y = j.at("y").get<std::vector<double>>();
  spec.h = j.at("h").get<std::vector<double>>();
  if (j.contains("noise")) {
    spec.noise_x = j.at("noise").value("vx", 0.0);
    spec.noise_y = j.at("noise").value("vy", 0.0);
  }
  spec.validate();
  return spec;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  if (cfg.problem) {
    j["game"] = game_to_json(cfg.problem->game);
    j["constraints"] = constraints_to_json(cfg.problem->constraints);
    Json caps = Json::array();
    for (const auto& c : cfg.problem->capacities) caps.push_back(affine_to_json(c));
    j["capacities"] = caps;
  } else {
    j["cournot"] = cournot_to_json(cfg.cournot ? *cfg.cournot : paper_network());
  }
  j["algorithm"] = std::string(to_string(cfg.algorithm));
  if (cfg.mu.size() == 1)
    j["mu"] = cfg.mu.front();
  else
    j["mu"] = cfg.mu;
  j["rho"] = cfg.rho;
  j["epsilon"] = cfg.epsilon;
  j["iters"] = cfg.num_iters;
  j["runs"] = cfg.num_runs;
  j["seed"] = cfg.seed;
  j["w0"] = cfg.w0 ? vector_to_json(*cfg.w0) : Json(nullptr);
  j["thinning"] = cfg.thinning;
  j["steady_window"] = cfg.steady_window;
  j["tol"] = cfg.tol;
  j["stochastic"] = cfg.stochastic;
  j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (j.contains("game")) {
    QuadraticGame game = game_from_json(j.at("game"));
    ConstraintSet cs = j.contains("constraints") ? constraints_from_json(j.at("constraints")) : ConstraintSet{};
    cs.validate(game.topology());
    std::vector<AffineConstraint> caps;
    for (const auto& c : j.value("capacities", Json::array())) caps.push_back(affine_from_json(c));
    cfg.problem = std::make_shared<const Problem>(Problem{std::move(game), std::move(cs), std::move(caps)});
  } else if (j.contains("cournot")) {
    cfg.cournot = cournot_from_json(j.at("cournot"));
  } else if (j.contains("network")) {
    cfg.cournot = paper_network(j.at("network").value("layout_seed", kDefaultLayoutSeed));
  }

  if (j.contains("algorithm")) cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  if (j.contains("mu")) {
    const Json& mu = j.at("mu");
    cfg.mu = mu.is_array() ? mu.get<std::vector<double>>() : std::vector<double>{mu.get<double>()};
  }
  cfg.rho = j.value("rho", cfg.rho);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.num_iters = j.value("iters", cfg.num_iters);
  cfg.num_runs = j.value("runs", cfg.num_runs);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("w0") && !j.at("w0").is_null()) cfg.w0 = vector_from_json(j.at("w0"));
  cfg.thinning = j.value("thinning", cfg.thinning);
  cfg.steady_window = j.value("steady_window", cfg.steady_window);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.stochastic = j.value("stochastic", cfg.stochastic);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw StructuralError(path.string() + ": " + e.what());
  }
}

}  // namespace gnep
