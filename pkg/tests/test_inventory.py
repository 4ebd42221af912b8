import json
import math
import random
from datetime import date

import pytest

import oracles
from camm import inventory as inv
from camm.errors import (
    DataFormatError,
    EmptyInputError,
    InvalidAnnotationError,
    UnknownAlgorithmError,
)


class TestAlgorithmId:
    def test_compares_case_insensitively(self):
        a = inv.AlgorithmId("MD5", inv.Family.HASH)
        b = inv.AlgorithmId("md5", inv.Family.HASH)
        assert a == b
        assert hash(a) == hash(b)
        assert a in {b}

    def test_family_distinguishes(self):
        a = inv.AlgorithmId("MD5", inv.Family.HASH)
        b = inv.AlgorithmId("MD5", inv.Family.OTHER)
        assert a != b

    def test_preserves_canonical_case(self):
        assert inv.AlgorithmId("Ed25519", inv.Family.SIGNATURE).to_doc() == {
            "canonical": "Ed25519",
            "family": "signature",
        }


class TestStrengthClass:
    def test_label_order(self):
        ranks = [
            inv.StrengthClass(label).rank
            for label in (
                inv.StrengthLabel.BROKEN,
                inv.StrengthLabel.WEAK,
                inv.StrengthLabel.ACCEPTABLE,
                inv.StrengthLabel.STRONG,
            )
        ]
        assert ranks == [0, 1, 2, 3]

    def test_doc_shape(self):
        doc = inv.StrengthClass(
            inv.StrengthLabel.STRONG, classical_bits=128, quantum_resistant=True
        ).to_doc()
        assert doc == {
            "rank": 3,
            "label": "strong",
            "quantum_resistant": True,
            "classical_bits": 128,
        }


class TestRuleset:
    def test_builtin_loads(self):
        rules = inv.builtin_ruleset()
        assert len(rules) >= 15
        assert len({rule.rule_id for rule in rules}) == len(rules)

    def test_backreferences_rejected(self):
        text = json.dumps(
            [
                {
                    "rule_id": "evil",
                    "pattern": r"(MD5)\1",
                    "algorithm": "MD5",
                    "family": "hash",
                }
            ]
        )
        with pytest.raises(DataFormatError):
            inv.load_ruleset(text)
        named = text.replace(r"(MD5)\\1", r"(?P<x>MD5)(?P=x)")
        with pytest.raises(DataFormatError):
            inv.load_ruleset(named)

    def test_template_group_must_exist(self):
        text = json.dumps(
            [
                {
                    "rule_id": "bad-template",
                    "pattern": r"\bAES-(128)\b",
                    "algorithm": "AES-{2}",
                    "family": "cipher",
                }
            ]
        )
        with pytest.raises(DataFormatError):
            inv.load_ruleset(text)

    def test_duplicate_rule_ids_rejected(self):
        row = {
            "rule_id": "dup",
            "pattern": "MD5",
            "algorithm": "MD5",
            "family": "hash",
        }
        with pytest.raises(DataFormatError):
            inv.load_ruleset(json.dumps([row, row]))

    def test_template_substitution(self):
        (rule,) = inv.load_ruleset(
            json.dumps(
                [
                    {
                        "rule_id": "sized",
                        "pattern": r"KEX-(256|512)",
                        "algorithm": "KEX-{1}",
                        "family": "kex",
                    }
                ]
            )
        )
        match = rule.regex.search("uses KEX-512 here")
        assert rule.canonical_for(match) == "KEX-512"


class TestKnowledgeBase:
    def test_builtin_lookup_is_case_insensitive(self):
        kb = inv.builtin_kb()
        assert kb.lookup("md5").canonical == "MD5"
        assert kb.lookup("sha1").canonical == "SHA-1"
        assert kb.lookup("nope") is None
        with pytest.raises(UnknownAlgorithmError):
            kb.require("nope")

    def test_alias_collision_rejected(self):
        rows = [
            {"canonical": "A-1", "family": "hash", "label": "weak"},
            {
                "canonical": "B-1",
                "family": "hash",
                "label": "weak",
                "aliases": ["a-1"],
            },
        ]
        with pytest.raises(DataFormatError):
            inv.load_kb(json.dumps(rows))

    def test_extra_fields_tolerated(self):
        rows = [
            {
                "canonical": "X-25519",
                "family": "kex",
                "label": "strong",
                "classical_bits": 128,
                "quantum_resistant": False,
                "notes": "whatever the curators wanted to say",
                "source": "curated",
            }
        ]
        kb = inv.load_kb(json.dumps(rows))
        assert kb.lookup("x-25519").strength.rank == 3


class TestClassifyStrength:
    def test_known_algorithm(self):
        strength, needs_review = inv.classify_strength("MD5", inv.builtin_kb())
        assert strength.label is inv.StrengthLabel.BROKEN
        assert not needs_review

    def test_unknown_is_weak_and_flagged(self):
        strength, needs_review = inv.classify_strength("FROBNITZ-9", inv.builtin_kb())
        assert strength.label is inv.StrengthLabel.WEAK
        assert needs_review

    def test_deterministic(self):
        kb = inv.builtin_kb()
        results = {inv.classify_strength("AES-128", kb) for _ in range(10)}
        assert len(results) == 1


def _finding(canonical, family, path="x.py", line=1, column=1):
    return inv.Finding(
        algorithm=inv.AlgorithmId(canonical, family),
        path=path,
        line=line,
        column=column,
        matched_text=canonical,
        rule_id="test-rule",
    )


class TestBuildInventory:
    def test_groups_by_distinct_algorithm(self):
        findings = [
            _finding("RSA-1024", inv.Family.SIGNATURE, "a.go", 3),
            _finding("RSA-2048", inv.Family.SIGNATURE, "a.go", 9),
            _finding("rsa-2048", inv.Family.SIGNATURE, "b.go", 2),
        ]
        built = inv.build_inventory(findings, inv.builtin_kb())
        names = [entry.algorithm.canonical for entry in built.entries]
        assert names == ["RSA-1024", "RSA-2048"]
        rsa2048 = built.entry("RSA-2048")
        assert rsa2048.sources == ("a.go:9", "b.go:2")
        assert rsa2048.key_length_bits == 2048

    def test_unknown_algorithm_kept_and_flagged(self):
        findings = [_finding("HOMEBREW-41", inv.Family.CIPHER)]
        built = inv.build_inventory(findings, inv.builtin_kb())
        (entry,) = built.entries
        assert entry.needs_review
        assert entry.strength.label is inv.StrengthLabel.WEAK
        assert not entry.confirmed

    def test_key_bits_only_for_keyed_families(self):
        findings = [
            _finding("SHA-256", inv.Family.HASH),
            _finding("AES-256", inv.Family.CIPHER),
        ]
        built = inv.build_inventory(findings, inv.builtin_kb())
        assert built.entry("SHA-256").key_length_bits is None
        assert built.entry("AES-256").key_length_bits == 256

    def test_annotations_apply(self):
        findings = [_finding("AES-256", inv.Family.CIPHER)]
        built = inv.build_inventory(
            findings,
            inv.builtin_kb(),
            annotations={"AES-256": {"confirmed": True, "purpose": "data at rest"}},
        )
        (entry,) = built.entries
        assert entry.confirmed
        assert entry.purpose == "data at rest"

    def test_round_trip(self):
        findings = [
            _finding("AES-256", inv.Family.CIPHER),
            _finding("MD5", inv.Family.HASH),
        ]
        built = inv.build_inventory(findings, inv.builtin_kb())
        doc = built.to_doc()
        assert inv.inventory_from_doc(json.loads(json.dumps(doc))).to_doc() == doc


class TestAnnotateEntry:
    def _entry(self):
        built = inv.build_inventory(
            [_finding("AES-256", inv.Family.CIPHER)], inv.builtin_kb()
        )
        return built.entries[0]

    def test_valid_edits(self):
        updated = inv.annotate_entry(
            self._entry(),
            confirmed=True,
            deployed_on="2024-01-10",
            deactivated_on="2025-06-01",
            primitives=["encryption"],
        )
        assert updated.confirmed
        assert updated.deployed_on == date(2024, 1, 10)
        assert updated.deactivated_on == date(2025, 6, 1)

    def test_unknown_field_rejected(self):
        with pytest.raises(InvalidAnnotationError):
            inv.annotate_entry(self._entry(), vendor="acme")

    def test_bad_types_rejected(self):
        with pytest.raises(InvalidAnnotationError):
            inv.annotate_entry(self._entry(), confirmed="yes")
        with pytest.raises(InvalidAnnotationError):
            inv.annotate_entry(self._entry(), key_length_bits="256")
        with pytest.raises(InvalidAnnotationError):
            inv.annotate_entry(self._entry(), deployed_on="not a date")

    def test_deactivation_before_deployment_rejected(self):
        with pytest.raises(InvalidAnnotationError):
            inv.annotate_entry(
                self._entry(), deployed_on="2025-01-01", deactivated_on="2024-01-01"
            )

    def test_is_active_respects_deactivation_date(self):
        entry = inv.annotate_entry(
            self._entry(), deployed_on="2020-01-01", deactivated_on="2021-01-01"
        )
        assert entry.is_active(as_of=date(2020, 6, 1))
        assert not entry.is_active(as_of=date(2021, 1, 1))
        assert not entry.is_active(as_of=date(2022, 1, 1))


def _confirmed_inventory(*names):
    findings = []
    kb = inv.builtin_kb()
    for name in names:
        family = kb.require(name).family
        findings.append(_finding(name, family))
    built = inv.build_inventory(findings, kb)
    return inv.CryptoInventory(
        tuple(inv.annotate_entry(entry, confirmed=True) for entry in built.entries)
    )


class TestCheckPolicy:
    def test_forbidden_algorithm(self):
        violations = inv.check_policy(
            _confirmed_inventory("MD5"), inv.default_policy()
        )
        rules = {violation.rule for violation in violations}
        assert "FORBIDDEN_ALGORITHM" in rules

    def test_min_key_bits_applies_when_known(self):
        policy = inv.load_policy(
            json.dumps({"name": "strict", "min_key_bits": {"signature": 3072}})
        )
        violations = inv.check_policy(_confirmed_inventory("RSA-2048"), policy)
        assert [violation.rule for violation in violations] == ["MIN_KEY_BITS"]

    def test_min_key_bits_skipped_when_unknown(self):
        policy = inv.load_policy(
            json.dumps({"name": "strict", "min_key_bits": {"signature": 3072}})
        )
        violations = inv.check_policy(_confirmed_inventory("ECDSA"), policy)
        assert violations == []

    def test_min_strength(self):
        policy = inv.load_policy(
            json.dumps({"name": "floor", "min_strength_label": "strong"})
        )
        violations = inv.check_policy(_confirmed_inventory("RSA-2048"), policy)
        assert [violation.rule for violation in violations] == ["MIN_STRENGTH"]

    def test_quantum_resistance(self):
        policy = inv.load_policy(
            json.dumps({"name": "pq", "require_quantum_resistant": True})
        )
        violations = inv.check_policy(_confirmed_inventory("Ed25519"), policy)
        assert [violation.rule for violation in violations] == ["QUANTUM_RESISTANCE"]
        assert inv.check_policy(_confirmed_inventory("ML-KEM-768"), policy) == []

    def test_unconfirmed_entries_are_skipped(self):
        built = inv.build_inventory(
            [_finding("MD5", inv.Family.HASH)], inv.builtin_kb()
        )
        assert inv.check_policy(built, inv.default_policy()) == []

    def test_deactivated_entries_are_skipped(self):
        confirmed = _confirmed_inventory("MD5")
        retired = inv.CryptoInventory(
            tuple(
                inv.annotate_entry(
                    entry, deployed_on="2000-01-01", deactivated_on="2010-01-01"
                )
                for entry in confirmed.entries
            )
        )
        assert inv.check_policy(retired, inv.default_policy()) == []
        assert inv.check_policy(
            retired, inv.default_policy(), as_of=date(2005, 1, 1)
        ) != []


class TestIntersectionAndSelection:
    def test_intersection_requires_input(self):
        with pytest.raises(EmptyInputError):
            inv.algorithm_intersection([])

    def test_intersection_is_case_insensitive(self):
        left = {
            inv.AlgorithmId("MD5", inv.Family.HASH),
            inv.AlgorithmId("SHA-256", inv.Family.HASH),
        }
        right = {inv.AlgorithmId("md5", inv.Family.HASH)}
        common = inv.algorithm_intersection([left, right])
        assert {alg.canonical.lower() for alg in common} == {"md5"}

    def test_selects_strongest(self):
        kb = inv.builtin_kb()
        best = inv.select_opportunistic({"MD5", "AES-128"}, {"md5", "aes-128"}, kb)
        assert best.canonical == "AES-128"

    def test_tie_breaks_lexicographically(self):
        kb = inv.builtin_kb()
        best = inv.select_opportunistic(
            {"AES-256", "SHA-256"}, {"sha-256", "aes-256"}, kb
        )
        assert best.canonical == "AES-256"

    def test_policy_filters_candidates(self):
        kb = inv.builtin_kb()
        best = inv.select_opportunistic(
            {"MD5"}, {"MD5"}, kb, inv.default_policy()
        )
        assert best is None

    def test_only_intersection_counts(self):
        kb = inv.builtin_kb()
        best = inv.select_opportunistic({"MD5", "SHA-256"}, {"MD5", "AES-128"}, kb)
        assert best.canonical == "MD5"

    def test_unknown_id_raises(self):
        with pytest.raises(UnknownAlgorithmError):
            inv.select_opportunistic({"NOT-REAL"}, {"MD5"}, inv.builtin_kb())

    def test_matches_brute_force_oracle(self):
        kb = inv.builtin_kb()
        names = ["MD5", "SHA-1", "SHA-256", "AES-128", "AES-256", "RSA-2048"]
        oracle_kb = {
            name: {
                "family": kb.require(name).family.value,
                "rank": kb.require(name).strength.rank,
                "quantum_resistant": kb.require(name).strength.quantum_resistant,
            }
            for name in names
        }
        policies = [
            (None, None),
            (
                inv.load_policy(json.dumps({"name": "p1", "forbidden": ["MD5"]})),
                {"forbidden": ["MD5"]},
            ),
            (
                inv.load_policy(
                    json.dumps({"name": "p2", "min_strength_label": "acceptable"})
                ),
                {"min_strength_rank": 2},
            ),
        ]
        rng = random.Random(777)
        for _ in range(200):
            local = {name for name in names if rng.random() < 0.5}
            remote = {name for name in names if rng.random() < 0.5}
            for policy, oracle_policy in policies:
                got = inv.select_opportunistic(local, remote, kb, policy)
                want = oracles.brute_force_select(local, remote, oracle_kb, oracle_policy)
                assert (got.canonical if got else None) == want


class TestExcludedInUse:
    def test_active_excluded_entries_are_reported(self):
        confirmed = _confirmed_inventory("MD5", "AES-256")
        flagged = inv.excluded_in_use(confirmed, ["md5"])
        assert [entry.algorithm.canonical for entry in flagged] == ["MD5"]

    def test_deactivated_entries_do_not_count(self):
        confirmed = _confirmed_inventory("MD5")
        retired = inv.CryptoInventory(
            tuple(
                inv.annotate_entry(
                    entry, deployed_on="2000-01-01", deactivated_on="2001-01-01"
                )
                for entry in confirmed.entries
            )
        )
        assert inv.excluded_in_use(retired, ["MD5"]) == []

    def test_accepts_algorithm_ids(self):
        confirmed = _confirmed_inventory("MD5")
        flagged = inv.excluded_in_use(
            confirmed, [inv.AlgorithmId("MD5", inv.Family.HASH)]
        )
        assert len(flagged) == 1


class TestMosca:
    def test_documented_examples(self):
        cases = [
            ((7, 5, 10), False, -2),
            ((3, 7, 10), False, 0),
            ((1, 1, 10), True, 8),
            ((3, 6, 10), True, 1),
        ]
        for (x, y, z), want_pass, want_margin in cases:
            passed, margin = inv.mosca_check(inv.MoscaParameters(x, y, z))
            assert passed is want_pass
            assert margin == want_margin

    def test_pass_iff_margin_positive(self):
        rng = random.Random(52)
        for _ in range(2000):
            params = inv.MoscaParameters(
                rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(0, 40)
            )
            passed, margin = inv.mosca_check(params)
            assert passed == (margin > 0)

    def test_invalid_parameters(self):
        for x, y, z in (
            (-1, 0, 1),
            (0, -0.5, 1),
            (0, 0, -3),
            (math.nan, 1, 1),
            (1, math.inf, 1),
            (True, 1, 1),
            ("3", 1, 1),
        ):
            with pytest.raises(ValueError):
                inv.MoscaParameters(x, y, z)
