#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmx/error.hpp"
#include "hmx/numbers.hpp"

namespace hmx::ncalg {

using Gen = std::uint32_t;
using Vertex = std::uint32_t;

/// Words compose like functions: the rightmost letter is applied first, so `w[0]` ends at the
/// target and `w.back()` starts at the source.
using Word = std::u32string;

struct Generator {
  std::string name;
  Vertex src = 0;
  Vertex tgt = 0;
  int degree = 1;
};

/// A path. Empty words are vertex idempotents, where src == tgt.
struct Mono {
  int deg = 0;
  Word word;
  Vertex src = 0;
  Vertex tgt = 0;

  auto operator<=>(const Mono&) const = default;
};

class Element {
 public:
  using Terms = std::map<Mono, Int>;

  Element() = default;
  Element(const Mono& m, Int c = 1);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // -1 for zero
  const Mono& leading() const { return terms_.rbegin()->first; }
  const Int& leading_coeff() const { return terms_.rbegin()->second; }
  Int coeff(const Mono& m) const;

  void add(const Mono& m, const Int& c);
  Element& operator+=(const Element& o);
  Element& operator-=(const Element& o);
  Element operator-() const;
  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(const Int& c, const Element& a);
  friend bool operator==(const Element& a, const Element& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

class Presentation {
 public:
  std::vector<std::string> vertices;
  std::vector<Generator> generators;
  std::vector<Element> relations;
  std::vector<std::pair<Gen, Gen>> inverses;  // (g, g^-1)

  Vertex add_vertex(std::string name);
  Gen add_generator(std::string name, Vertex src, Vertex tgt, int degree = 1);
  /// Adds g and its formal inverse (same degree); returns g, the inverse is g + 1.
  Gen add_invertible(std::string name, std::string inverse_name, Vertex src, Vertex tgt, int degree = 1);
  void add_relation(Element rel);

  std::optional<Gen> find(const std::string& name) const;
  Gen at(const std::string& name) const;
  std::optional<Vertex> find_vertex(const std::string& name) const;
  std::optional<Gen> inverse_of(Gen g) const;

  Mono mono(const Word& w) const;  // throws NotComposable
  Mono idem_mono(Vertex v) const { return Mono{0, {}, v, v}; }
  Element gen(Gen g) const { return Element(mono(Word(1, g))); }
  Element gen(const std::string& name) const { return gen(at(name)); }
  Element idem(Vertex v) const { return Element(idem_mono(v)); }
  Element one() const;
  Element path(const std::vector<std::string>& names) const;  // left-to-right as written

  /// Functional product a*b (b first). Incomposable terms vanish.
  Element mul(const Element& a, const Element& b) const;
  Element pow(const Element& a, unsigned k) const;

  /// Relations plus g g^-1 = e_tgt, g^-1 g = e_src for every inverse pair.
  std::vector<Element> all_relations() const;
  int max_relation_degree() const;
  int max_generator_degree() const;
  ValidationReport validate() const;

  std::string to_string(const Element& e) const;
  std::string to_string(const Mono& m) const;
};

Mono concat(const Presentation& p, const Word& left, const Mono& m, const Word& right);

struct Rule {
  Mono lhs;
  Element rhs;
};

struct CompletionOptions {
  std::size_t max_rules = 10000;
};

struct GradedBasis {
  std::vector<std::vector<Mono>> by_degree;  // normal monomials of each exact degree 0..D

  std::vector<std::size_t> dims() const;
  std::vector<Mono> corner(Vertex src, Vertex tgt, int degree) const;
  std::size_t total() const;
};

class RewriteSystem {
 public:
  const Presentation& base() const { return base_; }
  const std::vector<Rule>& rules() const { return rules_; }
  int completion_degree() const { return degree_; }
  /// True when every overlap resolved, not only those up to the completion degree.
  bool finite() const { return finite_; }
  bool vertex_dead(Vertex v) const { return dead_[v]; }

  /// Rewrites with the rules, no degree check.
  Element reduce(const Element& e) const;
  /// Normal form; throws DegreeOverflow above the certified degree when the system is not finite.
  Element normal_form(const Element& e) const;
  bool is_normal(const Mono& m) const;

  GradedBasis basis(int D) const;
  std::vector<std::size_t> graded_dims(int D) const { return basis(D).dims(); }

 private:
  friend RewriteSystem complete(const Presentation& pres, int D, const CompletionOptions& opts);
  friend class Completer;

  std::optional<std::pair<std::size_t, std::size_t>> match(const Word& w) const;  // (rule, position)
  void rebuild_index();

  Presentation base_;
  std::vector<Rule> rules_;
  std::vector<bool> dead_;
  int degree_ = 0;
  bool finite_ = false;
  std::size_t max_len_ = 0;
  std::multimap<std::uint64_t, std::size_t> index_;
};

RewriteSystem complete(const Presentation& pres, int D, const CompletionOptions& opts = {});

/// Integer basis of the central elements of filtration <= D, canonicalized by Hermite form.
std::vector<Element> center_up_to(const RewriteSystem& rw, int D);
bool is_central(const RewriteSystem& rw, const Element& z);

/// Homomorphism data: a vertex goes to a single vertex (non-unital maps allowed), a generator to
/// an element of the target.
struct AlgebraMap {
  std::vector<Vertex> vertex_image;
  std::vector<Element> gen_image;
};

Element apply(const AlgebraMap& f, const Presentation& source, const Presentation& target, const Element& e);
AlgebraMap compose(const AlgebraMap& g, const AlgebraMap& f, const Presentation& mid, const Presentation& target);
/// Generator and vertex assignment by equal names; throws IllTypedMap when a name is missing.
AlgebraMap map_by_name(const Presentation& source, const Presentation& target);
/// Checks that relations of the source map to zero in the target system.
ValidationReport check_homomorphism(const AlgebraMap& f, const Presentation& source, const RewriteSystem& target);

struct Tensor {
  Presentation pres;
  std::vector<std::size_t> factor_vertices;
  // gen_index[f][g][o] is the lifted generator for factor f, generator g and other-vertex index o.
  std::vector<std::vector<std::vector<Gen>>> gen_index;

  Vertex vertex_of(const std::vector<Vertex>& tuple) const;
  std::vector<Vertex> tuple_of(Vertex v) const;
  Gen lifted(std::size_t factor, Gen g, const std::vector<Vertex>& others) const;
  /// Pure tensor a_1 (x) ... (x) a_n.
  Element pure(const std::vector<const Presentation*>& factors, const std::vector<Element>& parts) const;
  /// a placed in factor f, units elsewhere.
  Element embed(const std::vector<const Presentation*>& factors, std::size_t f, const Element& a) const;

 private:
  std::size_t other_index(std::size_t factor, const std::vector<Vertex>& tuple) const;
};

Tensor tensor(const std::vector<const Presentation*>& factors, const std::vector<std::string>& labels);
Presentation tensor(const Presentation& a, const Presentation& b);

/// Adds the corner components of each element as relations after certifying centrality.
Presentation quotient_central(const Presentation& pres, const std::vector<Element>& elems, const RewriteSystem& rw);
Presentation quotient_central(const Presentation& pres, const std::vector<Element>& elems, int D);

struct DiagramEdge {
  std::size_t src = 0;
  std::size_t tgt = 0;
  AlgebraMap map;
};

struct Amalgam {
  Presentation pres;
  std::vector<std::vector<Vertex>> vertex_of;  // node, local vertex -> vertex
  std::vector<std::vector<Gen>> gen_of;        // node, local generator -> generator
};

Amalgam amalgamate(const std::vector<Presentation>& nodes, const std::vector<std::string>& labels,
                   const std::vector<DiagramEdge>& edges);

struct Collapse {
  Presentation pres;
  AlgebraMap map;                  // old presentation -> collapsed one
  std::vector<Gen> tree;           // forest generators, in the order chosen
};

Collapse morita_collapse(const Presentation& pres, bool require_connected = false);

struct IsoReport : ValidationReport {
  std::vector<std::size_t> source_dims;
  std::vector<std::size_t> target_dims;
};

IsoReport iso_check(const RewriteSystem& a, const RewriteSystem& b, const AlgebraMap& map, int D);

/// Free algebra on the named loops at a single vertex, and a few other standard presentations.
Presentation free_loops(const std::vector<std::string>& names);
/// Z[s, s^-1] with both generators of the given degree.
Presentation laurent(const std::string& name = "s", int degree = 1);
Presentation unit_algebra();

}  // namespace hmx::ncalg
