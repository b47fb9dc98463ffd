#include "hmx/ncalg.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "hmx/core_lattice.hpp"

namespace hmx::ncalg {

namespace {

std::uint64_t hash_step(std::uint64_t h, char32_t c) {
  h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL;
  return h * 0x100000001b3ULL;
}

std::uint64_t hash_word(std::u32string_view w) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char32_t c : w) h = hash_step(h, c);
  return h;
}

int word_degree(const Presentation& p, std::u32string_view w) {
  int d = 0;
  for (char32_t c : w) d += p.generators[c].degree;
  return d;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

}  // namespace

// ---------------------------------------------------------------- Element

Element::Element(const Mono& m, Int c) {
  if (c != 0) terms_.emplace(m, std::move(c));
}

int Element::degree() const { return terms_.empty() ? -1 : leading().deg; }

Int Element::coeff(const Mono& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Int(0) : it->second;
}

void Element::add(const Mono& m, const Int& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Element& Element::operator+=(const Element& o) {
  for (const auto& [m, c] : o.terms_) add(m, c);
  return *this;
}

Element& Element::operator-=(const Element& o) {
  for (const auto& [m, c] : o.terms_) add(m, -c);
  return *this;
}

Element Element::operator-() const {
  Element r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

Element operator*(const Int& c, const Element& a) {
  Element r;
  if (c == 0) return r;
  for (const auto& [m, v] : a.terms_) r.terms_.emplace(m, c * v);
  return r;
}

// ---------------------------------------------------------------- Presentation

Vertex Presentation::add_vertex(std::string name) {
  vertices.push_back(std::move(name));
  return static_cast<Vertex>(vertices.size() - 1);
}

Gen Presentation::add_generator(std::string name, Vertex src, Vertex tgt, int degree) {
  if (src >= vertices.size() || tgt >= vertices.size()) throw Error(ErrorKind::IllTypedMap, "generator " + name + " has unknown vertex");
  if (degree < 1) throw std::invalid_argument("generator degree must be positive");
  generators.push_back({std::move(name), src, tgt, degree});
  return static_cast<Gen>(generators.size() - 1);
}

Gen Presentation::add_invertible(std::string name, std::string inverse_name, Vertex src, Vertex tgt, int degree) {
  Gen g = add_generator(std::move(name), src, tgt, degree);
  Gen h = add_generator(std::move(inverse_name), tgt, src, degree);
  inverses.emplace_back(g, h);
  return g;
}

void Presentation::add_relation(Element rel) {
  if (!rel.is_zero()) relations.push_back(std::move(rel));
}

std::optional<Gen> Presentation::find(const std::string& name) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].name == name) return static_cast<Gen>(i);
  return std::nullopt;
}

Gen Presentation::at(const std::string& name) const {
  auto g = find(name);
  if (!g) throw std::out_of_range("no generator named " + name);
  return *g;
}

std::optional<Vertex> Presentation::find_vertex(const std::string& name) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == name) return static_cast<Vertex>(i);
  return std::nullopt;
}

std::optional<Gen> Presentation::inverse_of(Gen g) const {
  for (const auto& [a, b] : inverses) {
    if (a == g) return b;
    if (b == g) return a;
  }
  return std::nullopt;
}

Mono Presentation::mono(const Word& w) const {
  if (w.empty()) throw std::invalid_argument("empty word needs a vertex");
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (generators[w[i]].src != generators[w[i + 1]].tgt)
      throw Error(ErrorKind::NotComposable, generators[w[i]].name + " after " + generators[w[i + 1]].name);
  return Mono{word_degree(*this, w), w, generators[w.back()].src, generators[w.front()].tgt};
}

Element Presentation::one() const {
  Element e;
  for (Vertex v = 0; v < vertices.size(); ++v) e.add(idem_mono(v), 1);
  return e;
}

Element Presentation::path(const std::vector<std::string>& names) const {
  Word w;
  for (const auto& n : names) w.push_back(at(n));
  return Element(mono(w));
}

Element Presentation::mul(const Element& a, const Element& b) const {
  Element r;
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      if (ma.src != mb.tgt) continue;
      r.add(Mono{ma.deg + mb.deg, ma.word + mb.word, mb.src, ma.tgt}, ca * cb);
    }
  return r;
}

Element Presentation::pow(const Element& a, unsigned k) const {
  Element r = one();
  for (unsigned i = 0; i < k; ++i) r = mul(r, a);
  return r;
}

std::vector<Element> Presentation::all_relations() const {
  std::vector<Element> out = relations;
  for (const auto& [g, h] : inverses) {
    out.push_back(mul(gen(g), gen(h)) - idem(generators[g].tgt));
    out.push_back(mul(gen(h), gen(g)) - idem(generators[g].src));
  }
  return out;
}

int Presentation::max_relation_degree() const {
  int d = 0;
  for (const auto& r : all_relations()) d = std::max(d, r.degree());
  return d;
}

int Presentation::max_generator_degree() const {
  int d = 0;
  for (const auto& g : generators) d = std::max(d, g.degree);
  return d;
}

ValidationReport Presentation::validate() const {
  ValidationReport rep;
  for (const auto& g : generators)
    if (g.src >= vertices.size() || g.tgt >= vertices.size()) rep.fail("generator " + g.name + " has unknown vertex");
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto& r = relations[i];
    if (r.is_zero()) continue;
    const auto& first = r.terms().begin()->first;
    for (const auto& [m, c] : r.terms())
      if (m.src != first.src || m.tgt != first.tgt)
        rep.fail("relation " + std::to_string(i) + " mixes corners: " + to_string(r));
  }
  for (const auto& [g, h] : inverses)
    if (generators[g].src != generators[h].tgt || generators[g].tgt != generators[h].src)
      rep.fail("inverse pair " + generators[g].name + ", " + generators[h].name + " is ill-typed");
  return rep;
}

std::string Presentation::to_string(const Mono& m) const {
  if (m.word.empty()) return "e_" + vertices[m.src];
  std::string s;
  for (std::size_t i = 0; i < m.word.size(); ++i) s += (i ? "*" : "") + generators[m.word[i]].name;
  return s;
}

std::string Presentation::to_string(const Element& e) const {
  if (e.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (auto it = e.terms().rbegin(); it != e.terms().rend(); ++it) {
    Int c = it->second;
    if (first)
      s += (c < 0) ? "-" : "";
    else
      s += (c < 0) ? " - " : " + ";
    Int a = abs(c);
    if (a != 1) s += a.get_str() + " ";
    s += to_string(it->first);
    first = false;
  }
  return s;
}

Mono concat(const Presentation& p, const Word& left, const Mono& m, const Word& right) {
  if (left.empty() && right.empty()) return m;
  Mono r;
  r.word = left + m.word + right;
  r.deg = m.deg + word_degree(p, left) + word_degree(p, right);
  r.src = right.empty() ? m.src : p.generators[right.back()].src;
  r.tgt = left.empty() ? m.tgt : p.generators[left.front()].tgt;
  return r;
}

// ---------------------------------------------------------------- GradedBasis

std::vector<std::size_t> GradedBasis::dims() const {
  std::vector<std::size_t> d;
  for (const auto& b : by_degree) d.push_back(b.size());
  return d;
}

std::vector<Mono> GradedBasis::corner(Vertex src, Vertex tgt, int degree) const {
  std::vector<Mono> out;
  if (degree < 0 || static_cast<std::size_t>(degree) >= by_degree.size()) return out;
  for (const auto& m : by_degree[degree])
    if (m.src == src && m.tgt == tgt) out.push_back(m);
  return out;
}

std::size_t GradedBasis::total() const {
  std::size_t t = 0;
  for (const auto& b : by_degree) t += b.size();
  return t;
}

// ---------------------------------------------------------------- RewriteSystem

std::optional<std::pair<std::size_t, std::size_t>> RewriteSystem::match(const Word& w) const {
  for (std::size_t pos = 0; pos < w.size(); ++pos) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::size_t lim = std::min(max_len_, w.size() - pos);
    for (std::size_t len = 1; len <= lim; ++len) {
      h = hash_step(h, w[pos + len - 1]);
      auto [lo, hi] = index_.equal_range(h);
      for (auto it = lo; it != hi; ++it)
        if (std::u32string_view(rules_[it->second].lhs.word) == std::u32string_view(w).substr(pos, len))
          return std::make_pair(it->second, pos);
    }
  }
  return std::nullopt;
}

void RewriteSystem::rebuild_index() {
  index_.clear();
  max_len_ = 0;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    index_.emplace(hash_word(rules_[i].lhs.word), i);
    max_len_ = std::max(max_len_, rules_[i].lhs.word.size());
  }
}

Element RewriteSystem::reduce(const Element& e) const {
  Element result;
  Element work = e;
  while (!work.is_zero()) {
    Mono m = work.leading();
    Int c = work.leading_coeff();
    work.add(m, -c);
    if (m.word.empty()) {
      if (!dead_[m.src]) result.add(m, c);
      continue;
    }
    auto hit = match(m.word);
    if (!hit) {
      result.add(m, c);
      continue;
    }
    const Rule& r = rules_[hit->first];
    Word left = m.word.substr(0, hit->second);
    Word right = m.word.substr(hit->second + r.lhs.word.size());
    for (const auto& [t, tc] : r.rhs.terms()) work.add(concat(base_, left, t, right), c * tc);
  }
  return result;
}

Element RewriteSystem::normal_form(const Element& e) const {
  if (!finite_ && e.degree() > degree_)
    throw Error(ErrorKind::DegreeOverflow, "degree " + std::to_string(e.degree()) + " exceeds certified degree " +
                                               std::to_string(degree_));
  return reduce(e);
}

bool RewriteSystem::is_normal(const Mono& m) const {
  if (dead_[m.src] || dead_[m.tgt]) return false;
  return m.word.empty() || !match(m.word);
}

GradedBasis RewriteSystem::basis(int D) const {
  GradedBasis b;
  b.by_degree.assign(std::max(D, 0) + 1, {});
  if (D < 0) return b;
  const auto& gens = base_.generators;
  std::function<void(const Mono&)> grow = [&](const Mono& m) {
    for (Gen g = 0; g < gens.size(); ++g) {
      if (gens[g].src != m.tgt || dead_[gens[g].tgt]) continue;
      int deg = m.deg + gens[g].degree;
      if (deg > D) continue;
      Word w = Word(1, g) + m.word;
      bool reducible = false;
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (std::size_t len = 1; len <= std::min(max_len_, w.size()) && !reducible; ++len) {
        h = hash_step(h, w[len - 1]);
        auto [lo, hi] = index_.equal_range(h);
        for (auto it = lo; it != hi; ++it)
          if (std::u32string_view(rules_[it->second].lhs.word) == std::u32string_view(w).substr(0, len)) {
            reducible = true;
            break;
          }
      }
      if (reducible) continue;
      Mono next{deg, std::move(w), m.src, gens[g].tgt};
      b.by_degree[deg].push_back(next);
      grow(next);
    }
  };
  for (Vertex v = 0; v < base_.vertices.size(); ++v) {
    if (dead_[v]) continue;
    Mono e = base_.idem_mono(v);
    b.by_degree[0].push_back(e);
    grow(e);
  }
  for (auto& level : b.by_degree) std::sort(level.begin(), level.end());
  return b;
}

// ---------------------------------------------------------------- completion

class Completer {
 public:
  Completer(const Presentation& pres, int D, const CompletionOptions& opts) : D_(D), opts_(opts) {
    rw_.base_ = pres;
    rw_.degree_ = D;
    rw_.dead_.assign(pres.vertices.size(), false);
  }

  RewriteSystem run() {
    auto rep = rw_.base_.validate();
    if (!rep.passed()) throw Error(ErrorKind::IllTypedMap, rep.failures.front());
    for (const auto& r : rw_.base_.all_relations()) absorb(r);
    while (!pairs_.empty()) {
      Pair p = pairs_.top();
      pairs_.pop();
      if (!alive_[p.a] || !alive_[p.b]) continue;
      absorb(spoly(p));
    }
    bool finite = true;
    for (const auto& [a, b] : dropped_)
      if (alive_[a] && alive_[b]) finite = false;
    std::vector<Rule> kept;
    for (std::size_t i = 0; i < rw_.rules_.size(); ++i)
      if (alive_[i]) kept.push_back(std::move(rw_.rules_[i]));
    std::sort(kept.begin(), kept.end(), [](const Rule& x, const Rule& y) { return x.lhs < y.lhs; });
    rw_.rules_ = std::move(kept);
    rw_.rebuild_index();
    for (auto& r : rw_.rules_) r.rhs = rw_.reduce(r.rhs);
    rw_.finite_ = finite;
    return std::move(rw_);
  }

 private:
  struct Pair {
    int deg;
    std::size_t a, b, k;
    bool operator>(const Pair& o) const { return std::tie(deg, a, b, k) > std::tie(o.deg, o.a, o.b, o.k); }
  };

  void index_add(std::size_t i) {
    rw_.index_.emplace(hash_word(rw_.rules_[i].lhs.word), i);
    rw_.max_len_ = std::max(rw_.max_len_, rw_.rules_[i].lhs.word.size());
  }

  void index_remove(std::size_t i) {
    auto [lo, hi] = rw_.index_.equal_range(hash_word(rw_.rules_[i].lhs.word));
    for (auto it = lo; it != hi; ++it)
      if (it->second == i) {
        rw_.index_.erase(it);
        return;
      }
  }

  Element spoly(const Pair& p) const {
    const Rule& ra = rw_.rules_[p.a];
    const Rule& rb = rw_.rules_[p.b];
    const Word& A = ra.lhs.word;
    const Word& B = rb.lhs.word;
    Word right = B.substr(p.k);
    Word left = A.substr(0, A.size() - p.k);
    Element s;
    for (const auto& [t, c] : ra.rhs.terms()) s.add(concat(rw_.base_, {}, t, right), c);
    for (const auto& [t, c] : rb.rhs.terms()) s.add(concat(rw_.base_, left, t, {}), -c);
    return s;
  }

  void overlaps(std::size_t a, std::size_t b) {
    const Word& A = rw_.rules_[a].lhs.word;
    const Word& B = rw_.rules_[b].lhs.word;
    const std::size_t lim = std::min(A.size(), B.size());
    for (std::size_t k = 1; k < lim; ++k) {
      if (A.compare(A.size() - k, k, B, 0, k) != 0) continue;
      int deg = rw_.rules_[a].lhs.deg + word_degree(rw_.base_, std::u32string_view(B).substr(k));
      if (deg > D_) {
        dropped_.emplace_back(a, b);
        continue;
      }
      pairs_.push(Pair{deg, a, b, k});
    }
  }

  void kill_vertex(Vertex v) {
    rw_.dead_[v] = true;
    for (Gen g = 0; g < rw_.base_.generators.size(); ++g) {
      const auto& gen = rw_.base_.generators[g];
      if (gen.src == v || gen.tgt == v) pending_.push_back(rw_.base_.gen(g));
    }
  }

  void absorb(const Element& e) {
    pending_.push_back(e);
    while (!pending_.empty()) {
      Element cur = rw_.reduce(pending_.back());
      pending_.pop_back();
      if (cur.is_zero()) continue;
      Int lc = cur.leading_coeff();
      if (abs(lc) != 1)
        throw Error(ErrorKind::NonMonicRelation,
                    "leading coefficient " + lc.get_str() + " in " + rw_.base_.to_string(cur));
      if (lc < 0) cur = -cur;
      Mono lead = cur.leading();
      if (lead.word.empty()) {
        kill_vertex(lead.src);
        continue;
      }
      for (std::size_t j = 0; j < rw_.rules_.size(); ++j) {
        if (!alive_[j] || rw_.rules_[j].lhs.word.find(lead.word) == Word::npos) continue;
        alive_[j] = false;
        --alive_count_;
        index_remove(j);
        pending_.push_back(Element(rw_.rules_[j].lhs) - rw_.rules_[j].rhs);
      }
      Rule r{lead, Element(lead) - cur};
      rw_.rules_.push_back(std::move(r));
      alive_.push_back(true);
      ++alive_count_;
      const std::size_t idx = rw_.rules_.size() - 1;
      index_add(idx);
      if (alive_count_ > opts_.max_rules)
        throw Error(ErrorKind::CompletionBlowup,
                    std::to_string(alive_count_) + " rules exceed the cap of " + std::to_string(opts_.max_rules));
      for (std::size_t j = 0; j <= idx; ++j) {
        if (!alive_[j]) continue;
        overlaps(idx, j);
        if (j != idx) overlaps(j, idx);
      }
    }
  }

  int D_;
  CompletionOptions opts_;
  RewriteSystem rw_;
  std::vector<bool> alive_;
  std::size_t alive_count_ = 0;
  std::vector<Element> pending_;
  std::priority_queue<Pair, std::vector<Pair>, std::greater<Pair>> pairs_;
  std::vector<std::pair<std::size_t, std::size_t>> dropped_;
};

RewriteSystem complete(const Presentation& pres, int D, const CompletionOptions& opts) {
  return Completer(pres, D, opts).run();
}

// ---------------------------------------------------------------- center

bool is_central(const RewriteSystem& rw, const Element& z) {
  const auto& p = rw.base();
  for (Gen g = 0; g < p.generators.size(); ++g) {
    Element x = p.gen(g);
    if (!rw.normal_form(p.mul(z, x) - p.mul(x, z)).is_zero()) return false;
  }
  for (Vertex v = 0; v < p.vertices.size(); ++v) {
    Element e = p.idem(v);
    if (!rw.normal_form(p.mul(z, e) - p.mul(e, z)).is_zero()) return false;
  }
  return true;
}

std::vector<Element> center_up_to(const RewriteSystem& rw, int D) {
  const auto& p = rw.base();
  auto basis = rw.basis(D);
  std::vector<Mono> cols;
  for (const auto& level : basis.by_degree)
    for (const auto& m : level)
      if (m.src == m.tgt) cols.push_back(m);
  std::map<std::pair<Gen, Mono>, std::size_t> row_of;
  std::vector<std::vector<std::pair<std::size_t, Int>>> entries(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Element m(cols[c]);
    for (Gen g = 0; g < p.generators.size(); ++g) {
      Element x = p.gen(g);
      Element comm = rw.normal_form(p.mul(m, x) - p.mul(x, m));
      for (const auto& [t, v] : comm.terms()) {
        auto it = row_of.try_emplace({g, t}, row_of.size()).first;
        entries[c].emplace_back(it->second, v);
      }
    }
  }
  lattice::IntMatrix M(row_of.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (const auto& [r, v] : entries[c]) M(r, c) += v;
  lattice::IntMatrix K = row_of.empty() ? lattice::IntMatrix::identity(cols.size()) : lattice::integer_kernel(M);
  std::vector<Element> out;
  for (std::size_t k = 0; k < K.cols(); ++k) {
    Element z;
    for (std::size_t c = 0; c < cols.size(); ++c) z.add(cols[c], K(c, k));
    out.push_back(std::move(z));
  }
  return out;
}

// ---------------------------------------------------------------- maps

Element apply(const AlgebraMap& f, const Presentation& /*source*/, const Presentation& target, const Element& e) {
  Element out;
  for (const auto& [m, c] : e.terms()) {
    Element img;
    if (m.word.empty()) {
      img = target.idem(f.vertex_image.at(m.src));
    } else {
      img = f.gen_image.at(m.word[0]);
      for (std::size_t i = 1; i < m.word.size(); ++i) img = target.mul(img, f.gen_image.at(m.word[i]));
    }
    out += c * img;
  }
  return out;
}

AlgebraMap compose(const AlgebraMap& g, const AlgebraMap& f, const Presentation& mid, const Presentation& target) {
  AlgebraMap h;
  for (auto v : f.vertex_image) h.vertex_image.push_back(g.vertex_image.at(v));
  for (const auto& img : f.gen_image) h.gen_image.push_back(apply(g, mid, target, img));
  return h;
}

AlgebraMap map_by_name(const Presentation& source, const Presentation& target) {
  AlgebraMap f;
  for (const auto& v : source.vertices) {
    auto w = target.find_vertex(v);
    if (!w) throw Error(ErrorKind::IllTypedMap, "target has no vertex " + v);
    f.vertex_image.push_back(*w);
  }
  for (const auto& g : source.generators) {
    auto h = target.find(g.name);
    if (!h) throw Error(ErrorKind::IllTypedMap, "target has no generator " + g.name);
    f.gen_image.push_back(target.gen(*h));
  }
  return f;
}

ValidationReport check_homomorphism(const AlgebraMap& f, const Presentation& source, const RewriteSystem& target) {
  ValidationReport rep;
  const auto& tp = target.base();
  if (f.vertex_image.size() != source.vertices.size() || f.gen_image.size() != source.generators.size()) {
    rep.fail("map has wrong arity");
    return rep;
  }
  for (Gen g = 0; g < source.generators.size(); ++g) {
    const auto& gen = source.generators[g];
    for (const auto& [m, c] : f.gen_image[g].terms())
      if (m.src != f.vertex_image[gen.src] || m.tgt != f.vertex_image[gen.tgt]) {
        rep.fail("image of " + gen.name + " is ill-typed: " + tp.to_string(f.gen_image[g]));
        break;
      }
  }
  for (const auto& r : source.all_relations()) {
    Element img = target.reduce(apply(f, source, tp, r));
    if (!img.is_zero()) rep.fail("relation " + source.to_string(r) + " maps to " + tp.to_string(img));
  }
  return rep;
}

// ---------------------------------------------------------------- tensor

Vertex Tensor::vertex_of(const std::vector<Vertex>& tuple) const {
  Vertex v = 0;
  for (std::size_t f = 0; f < factor_vertices.size(); ++f) v = v * factor_vertices[f] + tuple[f];
  return v;
}

std::vector<Vertex> Tensor::tuple_of(Vertex v) const {
  std::vector<Vertex> t(factor_vertices.size());
  for (std::size_t f = factor_vertices.size(); f-- > 0;) {
    t[f] = v % factor_vertices[f];
    v /= factor_vertices[f];
  }
  return t;
}

std::size_t Tensor::other_index(std::size_t factor, const std::vector<Vertex>& tuple) const {
  std::size_t o = 0;
  for (std::size_t f = 0; f < factor_vertices.size(); ++f)
    if (f != factor) o = o * factor_vertices[f] + tuple[f];
  return o;
}

Gen Tensor::lifted(std::size_t factor, Gen g, const std::vector<Vertex>& others) const {
  return gen_index[factor][g][other_index(factor, others)];
}

Element Tensor::pure(const std::vector<const Presentation*>& factors, const std::vector<Element>& parts) const {
  const std::size_t n = factors.size();
  Element out;
  std::vector<std::pair<Mono, Int>> choice(n);
  std::function<void(std::size_t)> rec = [&](std::size_t f) {
    if (f == n) {
      std::vector<Vertex> state(n);
      Int coef = 1;
      for (std::size_t i = 0; i < n; ++i) {
        state[i] = choice[i].first.src;
        coef *= choice[i].second;
      }
      Vertex src = vertex_of(state);
      std::vector<Word> pieces(n);
      for (std::size_t i = n; i-- > 0;) {
        for (char32_t letter : choice[i].first.word) pieces[i].push_back(lifted(i, letter, state));
        state[i] = choice[i].first.tgt;
      }
      Word w;
      for (const auto& p : pieces) w += p;
      out.add(w.empty() ? pres.idem_mono(src) : pres.mono(w), coef);
      return;
    }
    for (const auto& [m, c] : parts[f].terms()) {
      choice[f] = {m, c};
      rec(f + 1);
    }
  };
  rec(0);
  return out;
}

Element Tensor::embed(const std::vector<const Presentation*>& factors, std::size_t f, const Element& a) const {
  std::vector<Element> parts;
  for (std::size_t i = 0; i < factors.size(); ++i) parts.push_back(i == f ? a : factors[i]->one());
  return pure(factors, parts);
}

Tensor tensor(const std::vector<const Presentation*>& factors, const std::vector<std::string>& labels) {
  Tensor T;
  const std::size_t n = factors.size();
  std::size_t nv = 1;
  for (const auto* p : factors) {
    T.factor_vertices.push_back(p->vertices.size());
    nv *= p->vertices.size();
  }
  for (Vertex v = 0; v < nv; ++v) {
    auto t = T.tuple_of(v);
    std::string name;
    for (std::size_t f = 0; f < n; ++f)
      if (factors[f]->vertices.size() > 1) name += (name.empty() ? "" : "|") + factors[f]->vertices[t[f]];
    T.pres.add_vertex(name.empty() ? "1" : name);
  }
  T.gen_index.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto& P = *factors[f];
    const std::size_t others = nv / P.vertices.size();
    T.gen_index[f].assign(P.generators.size(), std::vector<Gen>(others));
    for (Gen g = 0; g < P.generators.size(); ++g) {
      for (std::size_t o = 0; o < others; ++o) {
        // Decode o into the coordinates of the other factors.
        std::vector<Vertex> tuple(n);
        std::size_t rest = o;
        for (std::size_t i = n; i-- > 0;) {
          if (i == f) continue;
          tuple[i] = rest % factors[i]->vertices.size();
          rest /= factors[i]->vertices.size();
        }
        std::string name = labels[f] + "." + P.generators[g].name;
        if (others > 1) {
          name += "[";
          bool first = true;
          for (std::size_t i = 0; i < n; ++i) {
            if (i == f || factors[i]->vertices.size() == 1) continue;
            name += (first ? "" : ",") + factors[i]->vertices[tuple[i]];
            first = false;
          }
          name += "]";
        }
        tuple[f] = P.generators[g].src;
        Vertex s = T.vertex_of(tuple);
        tuple[f] = P.generators[g].tgt;
        Vertex t = T.vertex_of(tuple);
        T.gen_index[f][g][o] = T.pres.add_generator(name, s, t, P.generators[g].degree);
      }
    }
  }
  for (std::size_t f = 0; f < n; ++f) {
    const auto& P = *factors[f];
    const std::size_t others = nv / P.vertices.size();
    for (const auto& [g, h] : P.inverses)
      for (std::size_t o = 0; o < others; ++o) T.pres.inverses.emplace_back(T.gen_index[f][g][o], T.gen_index[f][h][o]);
  }
  std::vector<Element> units;
  for (const auto* p : factors) units.push_back(p->one());
  for (std::size_t f = 0; f < n; ++f)
    for (const auto& r : factors[f]->relations) {
      std::vector<Element> parts = units;
      parts[f] = r;
      // Splitting by corner keeps each lifted relation inside one (src, tgt) pair.
      Element full = T.pure(factors, parts);
      std::map<std::pair<Vertex, Vertex>, Element> corners;
      for (const auto& [m, c] : full.terms()) corners[{m.src, m.tgt}].add(m, c);
      for (auto& [k, e] : corners) T.pres.add_relation(std::move(e));
    }
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t f2 = f + 1; f2 < n; ++f2)
      for (Gen g = 0; g < factors[f]->generators.size(); ++g)
        for (Gen h = 0; h < factors[f2]->generators.size(); ++h) {
          const auto& G = factors[f]->generators[g];
          const auto& H = factors[f2]->generators[h];
          std::size_t rest_count = nv / (factors[f]->vertices.size() * factors[f2]->vertices.size());
          for (std::size_t o = 0; o < rest_count; ++o) {
            std::vector<Vertex> tuple(n);
            std::size_t rest = o;
            for (std::size_t i = n; i-- > 0;) {
              if (i == f || i == f2) continue;
              tuple[i] = rest % factors[i]->vertices.size();
              rest /= factors[i]->vertices.size();
            }
            auto at = [&](Vertex a, Vertex b) {
              auto t = tuple;
              t[f] = a;
              t[f2] = b;
              return t;
            };
            Word lhs{T.lifted(f, g, at(0, H.tgt)), T.lifted(f2, h, at(G.src, 0))};
            Word rhs{T.lifted(f2, h, at(G.tgt, 0)), T.lifted(f, g, at(0, H.src))};
            T.pres.add_relation(Element(T.pres.mono(lhs)) - Element(T.pres.mono(rhs)));
          }
        }
  return T;
}

Presentation tensor(const Presentation& a, const Presentation& b) { return tensor({&a, &b}, {"a", "b"}).pres; }

// ---------------------------------------------------------------- quotients and colimits

Presentation quotient_central(const Presentation& pres, const std::vector<Element>& elems, const RewriteSystem& rw) {
  Presentation out = pres;
  for (const auto& z : elems) {
    if (!is_central(rw, z)) throw Error(ErrorKind::NotCentral, pres.to_string(z));
    std::map<std::pair<Vertex, Vertex>, Element> corners;
    for (const auto& [m, c] : z.terms()) corners[{m.src, m.tgt}].add(m, c);
    for (auto& [k, e] : corners) out.add_relation(std::move(e));
  }
  return out;
}

Presentation quotient_central(const Presentation& pres, const std::vector<Element>& elems, int D) {
  return quotient_central(pres, elems, complete(pres, D));
}

Amalgam amalgamate(const std::vector<Presentation>& nodes, const std::vector<std::string>& labels,
                   const std::vector<DiagramEdge>& edges) {
  std::vector<std::size_t> vbase(nodes.size()), gbase(nodes.size());
  std::size_t nv = 0, ng = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    vbase[i] = nv;
    gbase[i] = ng;
    nv += nodes[i].vertices.size();
    ng += nodes[i].generators.size();
  }
  UnionFind uf(nv);
  for (const auto& e : edges) {
    if (e.src >= nodes.size() || e.tgt >= nodes.size()) throw Error(ErrorKind::IllTypedMap, "diagram edge out of range");
    const auto& S = nodes[e.src];
    const auto& T = nodes[e.tgt];
    if (e.map.vertex_image.size() != S.vertices.size() || e.map.gen_image.size() != S.generators.size())
      throw Error(ErrorKind::IllTypedMap, "map arity does not match " + labels[e.src]);
    for (Vertex v = 0; v < S.vertices.size(); ++v) {
      if (e.map.vertex_image[v] >= T.vertices.size()) throw Error(ErrorKind::IllTypedMap, "vertex image out of range");
      uf.unite(vbase[e.src] + v, vbase[e.tgt] + e.map.vertex_image[v]);
    }
    for (Gen g = 0; g < S.generators.size(); ++g)
      for (const auto& [m, c] : e.map.gen_image[g].terms())
        if (m.src != e.map.vertex_image[S.generators[g].src] || m.tgt != e.map.vertex_image[S.generators[g].tgt])
          throw Error(ErrorKind::IllTypedMap, "image of " + S.generators[g].name + " is ill-typed");
  }
  Amalgam A;
  std::map<std::size_t, Vertex> rep;
  std::vector<Vertex> vmap(nv);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    A.vertex_of.emplace_back();
    for (Vertex v = 0; v < nodes[i].vertices.size(); ++v) {
      std::size_t root = uf.find(vbase[i] + v);
      auto it = rep.find(root);
      if (it == rep.end()) it = rep.emplace(root, A.pres.add_vertex(labels[i] + "." + nodes[i].vertices[v])).first;
      vmap[vbase[i] + v] = it->second;
      A.vertex_of.back().push_back(it->second);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    A.gen_of.emplace_back();
    for (const auto& g : nodes[i].generators)
      A.gen_of.back().push_back(A.pres.add_generator(labels[i] + "." + g.name, vmap[vbase[i] + g.src],
                                                     vmap[vbase[i] + g.tgt], g.degree));
    for (const auto& [g, h] : nodes[i].inverses) A.pres.inverses.emplace_back(A.gen_of[i][g], A.gen_of[i][h]);
  }
  auto embed = [&](std::size_t node, const Element& e) {
    Element out;
    for (const auto& [m, c] : e.terms()) {
      Mono r;
      r.deg = m.deg;
      for (char32_t l : m.word) r.word.push_back(A.gen_of[node][l]);
      r.src = vmap[vbase[node] + m.src];
      r.tgt = vmap[vbase[node] + m.tgt];
      out.add(r, c);
    }
    return out;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& r : nodes[i].relations) A.pres.add_relation(embed(i, r));
  for (const auto& e : edges)
    for (Gen g = 0; g < nodes[e.src].generators.size(); ++g)
      A.pres.add_relation(A.pres.gen(A.gen_of[e.src][g]) - embed(e.tgt, e.map.gen_image[g]));
  return A;
}

Collapse morita_collapse(const Presentation& pres, bool require_connected) {
  UnionFind uf(pres.vertices.size());
  auto pairs = pres.inverses;
  std::sort(pairs.begin(), pairs.end());
  Collapse C;
  std::vector<bool> tree(pres.generators.size(), false);
  for (const auto& [g, h] : pairs) {
    const auto& G = pres.generators[g];
    if (G.src == G.tgt) continue;
    if (uf.unite(G.src, G.tgt)) {
      tree[g] = tree[h] = true;
      C.tree.push_back(g);
    }
  }
  std::map<std::size_t, Vertex> root_vertex;
  C.map.vertex_image.resize(pres.vertices.size());
  for (Vertex v = 0; v < pres.vertices.size(); ++v) {
    std::size_t r = uf.find(v);
    auto it = root_vertex.find(r);
    if (it == root_vertex.end()) it = root_vertex.emplace(r, C.pres.add_vertex(pres.vertices[r])).first;
    C.map.vertex_image[v] = it->second;
  }
  if (require_connected && C.pres.vertices.size() > 1)
    throw Error(ErrorKind::NoSpanningForest, "invertible generators leave " + std::to_string(C.pres.vertices.size()) +
                                                 " components");
  std::vector<Gen> newgen(pres.generators.size(), 0);
  for (Gen g = 0; g < pres.generators.size(); ++g) {
    const auto& G = pres.generators[g];
    if (tree[g]) {
      C.map.gen_image.push_back(C.pres.idem(C.map.vertex_image[G.src]));
      continue;
    }
    newgen[g] = C.pres.add_generator(G.name, C.map.vertex_image[G.src], C.map.vertex_image[G.tgt], G.degree);
    C.map.gen_image.push_back(C.pres.gen(newgen[g]));
  }
  for (const auto& [g, h] : pres.inverses)
    if (!tree[g]) C.pres.inverses.emplace_back(newgen[g], newgen[h]);
  for (const auto& r : pres.relations) C.pres.add_relation(apply(C.map, pres, C.pres, r));
  return C;
}

IsoReport iso_check(const RewriteSystem& a, const RewriteSystem& b, const AlgebraMap& map, int D) {
  IsoReport rep;
  const auto& A = a.base();
  const auto& B = b.base();
  auto ba = a.basis(D);
  auto bb = b.basis(D);
  rep.source_dims = ba.dims();
  rep.target_dims = bb.dims();
  auto hom = check_homomorphism(map, A, b);
  for (auto& f : hom.failures) rep.fail(std::move(f));
  std::vector<int> hit(B.vertices.size(), 0);
  for (Vertex v = 0; v < A.vertices.size(); ++v) {
    if (a.vertex_dead(v)) continue;
    Vertex w = map.vertex_image.at(v);
    if (b.vertex_dead(w)) rep.fail("live vertex " + A.vertices[v] + " maps to a dead vertex");
    if (hit[w]++) rep.fail("vertex map is not injective at " + B.vertices[w]);
  }
  for (Vertex w = 0; w < B.vertices.size(); ++w)
    if (!b.vertex_dead(w) && !hit[w]) rep.fail("vertex " + B.vertices[w] + " is not hit");
  if (!rep.passed()) return rep;
  for (int n = 0; n <= D; ++n) {
    const auto& src = ba.by_degree[n];
    const auto& tgt = bb.by_degree[n];
    if (src.size() != tgt.size()) {
      rep.fail("degree " + std::to_string(n) + ": dimension " + std::to_string(src.size()) + " vs " +
               std::to_string(tgt.size()));
      continue;
    }
    std::map<Mono, std::size_t> col;
    for (std::size_t j = 0; j < tgt.size(); ++j) col[tgt[j]] = j;
    lattice::IntMatrix M(src.size(), tgt.size());
    bool filtered = true;
    for (std::size_t i = 0; i < src.size(); ++i) {
      Element img = b.reduce(apply(map, A, B, Element(src[i])));
      for (const auto& [m, c] : img.terms()) {
        if (m.deg > n) filtered = false;
        if (m.deg == n) M(i, col.at(m)) = c;
      }
    }
    if (!filtered) {
      rep.fail("degree " + std::to_string(n) + ": map raises the filtration");
      continue;
    }
    if (!src.empty() && abs(lattice::determinant(M)) != 1)
      rep.fail("degree " + std::to_string(n) + ": associated graded map is not invertible over Z");
  }
  return rep;
}

Presentation free_loops(const std::vector<std::string>& names) {
  Presentation p;
  p.add_vertex("1");
  for (const auto& n : names) p.add_generator(n, 0, 0, 1);
  return p;
}

Presentation laurent(const std::string& name, int degree) {
  Presentation p;
  p.add_vertex("1");
  p.add_invertible(name, name + "^-1", 0, 0, degree);
  return p;
}

Presentation unit_algebra() {
  Presentation p;
  p.add_vertex("1");
  return p;
}

}  // namespace hmx::ncalg
