#include "doctest.h"

#include "splitlock/bench_io.hpp"
#include "splitlock/locking.hpp"
#include "splitlock/transform.hpp"
#include "support/helpers.hpp"

using namespace splitlock;
using testsupport::exhaustive_equivalent;
using testsupport::unpack_bits;

namespace {

Netlist c17()
{
	return parse_bench(std::string("INPUT(1)\nINPUT(2)\nINPUT(3)\nINPUT(6)\nINPUT(7)\n"
				       "OUTPUT(22)\nOUTPUT(23)\n"
				       "10 = NAND(1, 3)\n11 = NAND(3, 6)\n16 = NAND(2, 11)\n"
				       "19 = NAND(11, 7)\n22 = NAND(10, 16)\n23 = NAND(16, 19)\n"),
			   "c17");
}

// Three-input host for the exhaustive error-table example.
Netlist tiny3()
{
	return parse_bench(std::string("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\n"
				       "u = AND(a, b)\ny = XOR(u, c)\n"),
			   "tiny3");
}

bool key_equivalent(const Netlist &original, const Netlist &locked, const KeyAssignment &key)
{
	std::size_t ibits = original.input_count();
	for (std::uint64_t v = 0; v < (1ull << ibits); ++v) {
		InputPattern in{unpack_bits(v, ibits)};
		if (locked.simulate(in, key) != original.simulate(in))
			return false;
	}
	return true;
}

} // namespace

TEST_CASE("xor lock: correct key restores, wrong single bit corrupts")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 4;
	spec.correct_key = KeyAssignment{{true, false, true, true}};
	spec.rng_seed = 7;

	auto applied = apply_lock(n, spec);
	const Netlist &locked = applied.locked;
	CHECK(locked.key_inputs() ==
	      std::vector<std::string>{"keyinput0", "keyinput1", "keyinput2", "keyinput3"});
	CHECK(locked.inputs() == n.inputs());
	CHECK(locked.outputs() == n.outputs());
	CHECK(locked.gate_count() == n.gate_count() + 4);
	CHECK(applied.tap_nets.size() == 4);

	CHECK(key_equivalent(n, locked, spec.correct_key));
	// c17 is fully observable: flipping any single key bit corrupts some input.
	for (std::size_t flip = 0; flip < 4; ++flip) {
		KeyAssignment bad = spec.correct_key;
		bad.bits[flip] = !bad.bits[flip];
		CHECK(!key_equivalent(n, locked, bad));
	}

	// apply_key collapses back to an unlocked equivalent of the original.
	auto restored = apply_key(locked, spec.correct_key);
	CHECK(exhaustive_equivalent(restored, structural_simplify(n)));
}

TEST_CASE("xor lock is deterministic and seed-sensitive")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 3;
	spec.correct_key = KeyAssignment{{false, true, false}};
	spec.rng_seed = 11;
	CHECK(write_bench(lock_xor(n, spec)) == write_bench(lock_xor(n, spec)));
	LockSpec other = spec;
	other.rng_seed = 12;
	CHECK(write_bench(lock_xor(n, spec)) != write_bench(lock_xor(n, other)));
}

TEST_CASE("xor lock input validation")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 100;
	spec.correct_key.bits.resize(100, false);
	CHECK_THROWS_AS(lock_xor(n, spec), NetlistError);

	spec.key_size = 2;
	spec.correct_key.bits.resize(3, false);
	CHECK_THROWS_AS(lock_xor(n, spec), NetlistError);

	spec.key_size = 0;
	spec.correct_key.bits.clear();
	CHECK_THROWS_AS(lock_xor(n, spec), NetlistError);

	LockSpec ok;
	ok.scheme = LockScheme::Xor;
	ok.key_size = 1;
	ok.correct_key = KeyAssignment{{false}};
	auto locked = lock_xor(n, ok);
	CHECK_THROWS_AS(lock_xor(locked, ok), NetlistError);
}

TEST_CASE("sarlock error table matches the three-bit example exactly")
{
	auto n = tiny3();
	LockSpec spec;
	spec.scheme = LockScheme::Sarlock;
	spec.key_size = 3;
	spec.correct_key = KeyAssignment{bits_from_string("101")}; // k* = 101
	auto applied = apply_lock(n, spec);
	CHECK(applied.tap_nets == std::vector<std::string>{"a", "b", "c"});
	CHECK(applied.protected_output == "y");

	auto dist = error_distribution(n, applied.locked);
	REQUIRE(dist.input_bits == 3);
	REQUIRE(dist.key_bits == 3);
	// Error at (i, k) iff i == k and k != k*; k* column and i = k* row clean.
	for (std::uint64_t i = 0; i < 8; ++i)
		for (std::uint64_t k = 0; k < 8; ++k)
			CHECK(dist.cell(i, k) == !(i == k && k != 5));
}

TEST_CASE("sarlock on a wider host: one erroneous slice per wrong key")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Sarlock;
	spec.key_size = 3;
	spec.correct_key = KeyAssignment{bits_from_string("010")};
	auto locked = lock_sarlock(n, spec);

	CHECK(key_equivalent(n, locked, spec.correct_key));
	auto dist = error_distribution(n, locked);
	for (std::uint64_t k = 0; k < 8; ++k) {
		std::size_t errors = 0;
		for (std::uint64_t i = 0; i < 32; ++i) {
			if (!dist.cell(i, k)) {
				++errors;
				// The erroneous inputs are exactly those whose
				// tapped slice (three leading bits) equals k.
				CHECK((i >> 2) == k);
			}
		}
		CHECK(errors == (k == 2 ? 0u : 4u));
	}
}

TEST_CASE("sarlock validation")
{
	auto n = tiny3();
	LockSpec spec;
	spec.scheme = LockScheme::Sarlock;
	spec.key_size = 4;
	spec.correct_key.bits.resize(4, false);
	CHECK_THROWS_AS(lock_sarlock(n, spec), NetlistError); // only 3 inputs

	spec.key_size = 2;
	spec.correct_key.bits.resize(2, false);
	spec.tap_ports = {"a", "ghost"};
	CHECK_THROWS_AS(lock_sarlock(n, spec), NetlistError);

	spec.tap_ports = {"a", "b"};
	spec.protected_output = "nope";
	CHECK_THROWS_AS(lock_sarlock(n, spec), NetlistError);
}

TEST_CASE("lut lock: correct key restores, every single-bit flip is observable")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Lut2Stage;
	spec.lut.stage1_widths = {2, 2};
	spec.lut.stage2_extra_taps = 1;
	// table bits: 4 + 4 + 2^3 = 16; two pad bits on top.
	spec.key_size = 18;
	spec.rng_seed = 5;
	spec.correct_key = lut_reference_key(spec.lut, spec.key_size, spec.rng_seed);

	auto applied = apply_lock(n, spec);
	const Netlist &locked = applied.locked;
	CHECK(locked.key_count() == 18);
	CHECK(applied.tap_nets.size() == 5);
	CHECK(applied.protected_output == "22");

	CHECK(key_equivalent(n, locked, spec.correct_key));
	for (std::size_t flip = 0; flip < spec.key_size; ++flip) {
		KeyAssignment bad = spec.correct_key;
		bad.bits[flip] = !bad.bits[flip];
		CHECK(!key_equivalent(n, locked, bad));
	}
}

TEST_CASE("lut lock: default topology stores 144 table bits across 14 taps")
{
	LutTopology lut;
	CHECK(lut.tap_count() == 14);
	CHECK(lut.stage2_width() == 4);
	CHECK(lut.table_bits() == 144);

	// The 156-bit default key is the 144 table bits plus 12 pad gates.
	auto key = lut_reference_key(lut, 156, 3);
	CHECK(key.bits.size() == 156);
}

TEST_CASE("lut lock rejects a key budget below the table size")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Lut2Stage;
	spec.lut.stage1_widths = {2, 2};
	spec.lut.stage2_extra_taps = 1;
	spec.key_size = 15;
	spec.correct_key.bits.resize(15, false);
	CHECK_THROWS_AS(lock_lut(n, spec), NetlistError);
	CHECK_THROWS_AS(lut_reference_key(spec.lut, 15, 1), NetlistError);

	LockSpec wide = spec;
	wide.lut.stage1_widths = {6, 6};
	wide.lut.stage2_extra_taps = 2;
	wide.key_size = 156;
	wide.correct_key.bits.resize(156, false);
	CHECK_THROWS_AS(lock_lut(n, wide), NetlistError); // needs 14 taps, c17 has 5 inputs
}

TEST_CASE("lut lock is deterministic per seed")
{
	auto n = c17();
	LockSpec spec;
	spec.scheme = LockScheme::Lut2Stage;
	spec.lut.stage1_widths = {2, 2};
	spec.lut.stage2_extra_taps = 1;
	spec.key_size = 16;
	spec.rng_seed = 21;
	spec.correct_key = lut_reference_key(spec.lut, spec.key_size, spec.rng_seed);
	CHECK(write_bench(lock_lut(n, spec)) == write_bench(lock_lut(n, spec)));
}

TEST_CASE("error distribution against an independent evaluator")
{
	auto n = tiny3();
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 2;
	spec.correct_key = KeyAssignment{{true, false}};
	spec.rng_seed = 2;
	auto locked = lock_xor(n, spec);

	auto dist = error_distribution(n, locked);
	testsupport::RefEval ref_orig(n), ref_locked(locked);
	for (std::uint64_t i = 0; i < 8; ++i) {
		for (std::uint64_t k = 0; k < 4; ++k) {
			auto want = ref_orig.outputs(unpack_bits(i, 3));
			auto got = ref_locked.outputs(unpack_bits(i, 3), unpack_bits(k, 2));
			CHECK(dist.cell(i, k) == (want == got));
		}
	}
	// k* column is all-true.
	for (std::uint64_t i = 0; i < 8; ++i)
		CHECK(dist.cell(i, 2)); // key 10 = k*
}

TEST_CASE("error distribution with an unlocked pair has one all-true column")
{
	auto n = tiny3();
	auto dist = error_distribution(n, n);
	CHECK(dist.key_bits == 0);
	for (std::uint64_t i = 0; i < 8; ++i)
		CHECK(dist.cell(i, 0));
}

TEST_CASE("error distribution enforces its size limits")
{
	auto wide = testsupport::random_netlist(1, 20, 0, 25, 2);
	CHECK_THROWS_AS(error_distribution(wide, wide), NetlistError);

	// An all-live chain so 15 key gates fit: g_i = XOR(g_{i-1}, in_{i mod 10}).
	std::vector<std::string> inputs;
	for (int i = 0; i < 10; ++i)
		inputs.push_back("in" + std::to_string(i));
	std::vector<Gate> gates{Gate{"g0", GateKind::Buf, {"in0"}}};
	for (int i = 1; i < 16; ++i)
		gates.push_back(Gate{"g" + std::to_string(i), GateKind::Xor,
				     {"g" + std::to_string(i - 1), inputs[static_cast<std::size_t>(i) % 10]}});
	Netlist base("chain", inputs, {}, {"g15"}, gates);
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 15;
	spec.correct_key.bits.resize(15, false);
	auto locked = lock_xor(base, spec);
	CHECK_THROWS_AS(error_distribution(base, locked), NetlistError); // 10 + 15 > 24
}

TEST_CASE("scheme names round trip")
{
	CHECK(lock_scheme_from("xor") == LockScheme::Xor);
	CHECK(lock_scheme_from("SARLock") == LockScheme::Sarlock);
	CHECK(lock_scheme_from("lut2stage") == LockScheme::Lut2Stage);
	CHECK(lock_scheme_from("lut") == LockScheme::Lut2Stage);
	CHECK(lock_scheme_from("anti-sat") == std::nullopt);
	CHECK(to_string(LockScheme::Sarlock) == "sarlock");
}
