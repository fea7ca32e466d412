"""Tool registry and adapters: builtin mocks, subprocess tools, HTTP tools.

The builtin catalog stands in for a real scientific toolset at desk scale.
Each builtin is a deterministic function of its inputs (a few keep explicit
per-value fixtures, e.g. known CAS numbers) so chains replay identically.
Process tools speak JSON-in/JSON-out over stdin/stdout; HTTP tools POST the
input map and read the same JSON shape back.
"""

from __future__ import annotations

import json
import subprocess
import threading
from dataclasses import dataclass, field

from .errors import MissingInputError, OutputFormatViolation, RegistryError
from .kg import ToolSpec
from .providers import fnv1a64


@dataclass
class ToolResult:
    outputs: dict[str, str]
    ok: bool = True
    transient: bool = False
    diagnostics: str = ""


@dataclass
class ToolManifest:
    spec: ToolSpec
    adapter: str  # builtin | process | http
    adapter_config: dict
    reentrant: bool = True

    def __post_init__(self) -> None:
        if self.adapter not in ("builtin", "process", "http"):
            raise RegistryError(f"unknown adapter kind '{self.adapter}'")
        if self.adapter == "builtin" and "builtin" not in self.adapter_config:
            raise RegistryError(f"builtin manifest for '{self.spec.id}' needs adapter_config.builtin")
        if self.adapter == "process":
            if "command" not in self.adapter_config:
                raise RegistryError(f"process manifest for '{self.spec.id}' needs adapter_config.command")
            timeout = self.adapter_config.get("timeout_s", 10)
            if not (1 <= timeout <= 600):
                raise RegistryError(f"process timeout must be in [1, 600] seconds, got {timeout}")
        if self.adapter == "http" and "endpoint" not in self.adapter_config:
            raise RegistryError(f"http manifest for '{self.spec.id}' needs adapter_config.endpoint")

    @classmethod
    def from_dict(cls, obj: dict) -> "ToolManifest":
        spec_obj = obj["spec"]
        spec = ToolSpec(
            id=spec_obj["id"],
            name=spec_obj.get("name", spec_obj["id"]),
            purpose=spec_obj.get("purpose", ""),
            functions=tuple(spec_obj.get("functions", ())),
            input_formats=tuple(spec_obj["input_formats"]),
            output_formats=tuple(spec_obj["output_formats"]),
            category=spec_obj.get("category", ""),
            source=spec_obj.get("source", ""),
            risk_level=spec_obj.get("risk_level", "low"),
        )
        return cls(
            spec=spec,
            adapter=obj.get("adapter", "builtin"),
            adapter_config=dict(obj.get("adapter_config", {})),
            reentrant=bool(obj.get("reentrant", True)),
        )


class BuiltinFailure(Exception):
    def __init__(self, message: str, transient: bool = False):
        super().__init__(message)
        self.transient = transient


def _digest8(text: str) -> str:
    return f"{fnv1a64(text.encode('utf-8')):016x}"[:8]


def _hash_int(text: str) -> int:
    return fnv1a64(text.encode("utf-8"))


def _canon(inputs: dict[str, str]) -> str:
    return "|".join(f"{k}={inputs[k]}" for k in sorted(inputs))


_SMILES_POOL = ("CCO", "CCN", "CCC", "CC(C)O", "CC(=O)C", "CCOC(=O)C", "CCCCO")

_CAS_FIXTURES = {
    "CC(=O)Oc1ccccc1C(=O)O": "50-78-2",   # acetylsalicylic acid
    "Oc1ccc(Cl)cc1": "106-48-9",          # 4-chlorophenol
    "Oc1ccccc1": "108-95-2",              # phenol
    "O=C(O)c1ccccc1O": "69-72-7",         # salicylic acid
}

_REACTION_FIXTURES = {
    "salicylic acid + acetic anhydride": "CC(=O)Oc1ccccc1C(=O)O",
    "phenol + chlorine": "Oc1ccc(Cl)cc1",
}

_SAFETY_TEXT_FIXTURES = {
    "50-78-2": "low acute toxicity; irritant to mucous membranes; not classified as explosive",
    "106-48-9": "toxic by ingestion and skin contact; harmful to aquatic life",
    "108-95-2": "toxic in contact with skin; causes severe burns",
}

_PROTEIN_FIXTURES = {
    "alpha helix scaffold": "MKELVRKLEEEVKKLEEEVKKLEG",
    "beta sheet scaffold": "MTEVTVKVDTVTVKVDTVTVKVGS",
}

_CIF_FIXTURES = {
    "porous framework candidates": "TBAPy_Ti.cif",
}

_CIF_SMILES_FIXTURES = {
    "TBAPy_Ti.cif": "c1ccc2ccccc2c1",
}

_AMINO = "ACDEFGHIKLMNPQRSTVWY"


def _synthetic_sequence(seedtext: str, length: int = 20) -> str:
    h = _hash_int(seedtext)
    out = []
    for _ in range(length):
        out.append(_AMINO[h % len(_AMINO)])
        h = (h * 0x100000001B3 + 0x9E3779B9) & 0xFFFFFFFFFFFFFFFF
    return "".join(out)


def _selfies_encode(smiles: str) -> str:
    out = []
    for ch in smiles:
        if ch.isalpha():
            out.append(f"[{ch}]")
        elif ch.isdigit():
            out.append(f"[Ring{ch}]")
        elif ch in "=#":
            out.append(f"[{ch}]")
        elif ch == "(":
            out.append("[Branch]")
        elif ch == ")":
            out.append("[/Branch]")
    return "".join(out)


def _bi_reaction(spec: ToolSpec, inputs: dict) -> dict:
    text = inputs["text"].strip().lower()
    smiles = _REACTION_FIXTURES.get(text)
    if smiles is None:
        smiles = _SMILES_POOL[_hash_int(text) % len(_SMILES_POOL)]
    return {"smiles": smiles}


def _bi_smiles_to_selfies(spec: ToolSpec, inputs: dict) -> dict:
    return {"selfies": _selfies_encode(inputs["smiles"])}


def _bi_molecule_caption(spec: ToolSpec, inputs: dict) -> dict:
    selfies = inputs["selfies"]
    if selfies == _selfies_encode("CC(=O)Oc1ccccc1C(=O)O"):
        return {"text": "acetylsalicylic acid, the analgesic sold as aspirin"}
    tokens = selfies.count("[")
    return {"text": f"organic molecule described by {tokens} structural tokens"}


def _bi_patent_check(spec: ToolSpec, inputs: dict) -> dict:
    smiles = inputs["smiles"]
    if smiles == "CC(=O)Oc1ccccc1C(=O)O":
        return {"text": "patent record found: historical filings, compound long off-patent"}
    return {"text": f"no patent record found for {smiles}"}


def _bi_smiles_to_cas(spec: ToolSpec, inputs: dict) -> dict:
    smiles = inputs["smiles"]
    cas = _CAS_FIXTURES.get(smiles)
    if cas is None:
        h = _hash_int(smiles)
        cas = f"{1000 + h % 9000}-{10 + h % 90}-{h % 10}"
    return {"cas": cas}


def _bi_cas_safety_info(spec: ToolSpec, inputs: dict) -> dict:
    cas = inputs["cas"]
    text = _SAFETY_TEXT_FIXTURES.get(cas, f"no specific hazards recorded for CAS {cas}")
    return {"text": text}


def _bi_protein_generate(spec: ToolSpec, inputs: dict) -> dict:
    brief = inputs["text"].strip().lower()
    seq = _PROTEIN_FIXTURES.get(brief, _synthetic_sequence(brief))
    return {"sequence": seq}


def _bi_unfolding_energy(spec: ToolSpec, inputs: dict) -> dict:
    h = _hash_int(inputs["sequence"])
    return {"text": f"unfolding force {100 + h % 200} pN, unfolding energy {10 + h % 40} kcal/mol"}


def _bi_fold_structure(spec: ToolSpec, inputs: dict) -> dict:
    return {"structure": f"structure:{_digest8(inputs['sequence'])}.pdb"}


def _bi_vibration_modes(spec: ToolSpec, inputs: dict) -> dict:
    h = _hash_int(inputs["structure"])
    freqs = ", ".join(str(round(5 + ((h >> (4 * i)) % 80) / 4.0, 2)) for i in range(6))
    return {"text": f"lowest vibrational frequencies (cm^-1): {freqs}"}


def _bi_secondary_structure(spec: ToolSpec, inputs: dict) -> dict:
    h = _hash_int(inputs["structure"])
    helix = 20 + h % 50
    sheet = (100 - helix) * (h >> 8 & 0xFF) // 400
    return {"text": f"secondary structure content: helix {helix}%, sheet {sheet}%, coil {100 - helix - sheet}%"}


def _bi_dataset_load(spec: ToolSpec, inputs: dict) -> dict:
    name = inputs["text"].strip().lower().replace(" ", "_")
    return {"csv": f"dataset:{name}:96_rows"}


def _bi_molecule_features(spec: ToolSpec, inputs: dict) -> dict:
    kind = inputs["feature_kind"].strip().lower()
    return {"features": f"features:{kind}:{_digest8(inputs['csv'])}"}


def _bi_train_eval_classifier(spec: ToolSpec, inputs: dict) -> dict:
    algo = inputs["algo"].strip().lower()
    h = _hash_int(algo + "|" + inputs["features"])
    return {"text": f"{algo} classifier accuracy {70 + h % 25}% on held-out reactivity labels"}


def _bi_mof_list(spec: ToolSpec, inputs: dict) -> dict:
    key = inputs["text"].strip().lower()
    return {"cif": _CIF_FIXTURES.get(key, f"{key.replace(' ', '_')}.cif")}


def _bi_thermal_stability(spec: ToolSpec, inputs: dict) -> dict:
    cif = inputs["cif"]
    if cif == "TBAPy_Ti.cif":
        return {"text": "predicted thermal stability 486 C"}
    return {"text": f"predicted thermal stability {300 + _hash_int(cif) % 300} C"}


def _bi_gas_adsorption(spec: ToolSpec, inputs: dict) -> dict:
    cif = inputs["cif"]
    if cif == "TBAPy_Ti.cif":
        return {"text": "simulated co2 uptake 142 mg/g at 298 K"}
    return {"text": f"simulated co2 uptake {50 + _hash_int(cif) % 200} mg/g at 298 K"}


def _bi_cif_to_smiles(spec: ToolSpec, inputs: dict) -> dict:
    cif = inputs["cif"]
    smiles = _CIF_SMILES_FIXTURES.get(cif, _SMILES_POOL[_hash_int(cif) % len(_SMILES_POOL)])
    return {"smiles": smiles}


def _bi_price_lookup(spec: ToolSpec, inputs: dict) -> dict:
    cas = inputs["cas"]
    if cas == "7135-25-5":
        return {"text": "market price 86 per gram"}
    return {"text": f"market price {10 + _hash_int(cas) % 90} per gram"}


def _bi_web_search(spec: ToolSpec, inputs: dict) -> dict:
    return {"text": f"search notes ({_digest8(inputs['text'])}): top results summarized"}


def _bi_text_echo(spec: ToolSpec, inputs: dict) -> dict:
    return {"text": inputs["text"]}


def _bi_slow_echo(spec: ToolSpec, inputs: dict) -> dict:
    # deterministic output; the delay exists so tests can observe busy sessions
    import time as _time

    _time.sleep(0.05)
    return {"text": inputs["text"]}


def _bi_generic(spec: ToolSpec, inputs: dict) -> dict:
    """Fallback mock for any tool: one tagged value per declared output format."""
    digest = _digest8(spec.id + "|" + _canon(inputs))
    return {fmt: f"{spec.id}/{fmt}:{digest}" for fmt in spec.output_formats}


def _bi_always_fail(spec: ToolSpec, inputs: dict) -> dict:
    raise BuiltinFailure("simulated transient outage", transient=True)


def _bi_fail_hard(spec: ToolSpec, inputs: dict) -> dict:
    raise BuiltinFailure("simulated permanent fault", transient=False)


BUILTINS = {
    "reaction_predict": _bi_reaction,
    "smiles_to_selfies": _bi_smiles_to_selfies,
    "molecule_caption": _bi_molecule_caption,
    "patent_check": _bi_patent_check,
    "smiles_to_cas": _bi_smiles_to_cas,
    "cas_safety_info": _bi_cas_safety_info,
    "protein_generate": _bi_protein_generate,
    "unfolding_energy": _bi_unfolding_energy,
    "fold_structure": _bi_fold_structure,
    "vibration_modes": _bi_vibration_modes,
    "secondary_structure": _bi_secondary_structure,
    "dataset_load": _bi_dataset_load,
    "molecule_features": _bi_molecule_features,
    "train_eval_classifier": _bi_train_eval_classifier,
    "mof_list": _bi_mof_list,
    "thermal_stability": _bi_thermal_stability,
    "gas_adsorption": _bi_gas_adsorption,
    "cif_to_smiles": _bi_cif_to_smiles,
    "price_lookup": _bi_price_lookup,
    "web_search": _bi_web_search,
    "text_echo": _bi_text_echo,
    "slow_echo": _bi_slow_echo,
    "generic": _bi_generic,
    "always_fail": _bi_always_fail,
    "fail_hard": _bi_fail_hard,
}

# stateful test helpers, excluded from the purity guarantee of the catalog above
STATEFUL_BUILTINS = ("flaky_once", "concurrency_probe")


@dataclass
class _Entry:
    manifest: ToolManifest
    lock: threading.Lock | None
    state: dict = field(default_factory=dict)


class ToolHost:
    """Registry of invokable tools; registration is writer-locked."""

    def __init__(self) -> None:
        self._entries: dict[str, _Entry] = {}
        self._write_lock = threading.Lock()
        self.probe_max_concurrency = 0
        self._probe_gauge = 0
        self._probe_lock = threading.Lock()

    def register(self, manifest: ToolManifest) -> None:
        with self._write_lock:
            if manifest.spec.id in self._entries:
                raise RegistryError(f"tool id '{manifest.spec.id}' already registered")
            if manifest.adapter == "builtin":
                name = manifest.adapter_config["builtin"]
                if name not in BUILTINS and name not in STATEFUL_BUILTINS:
                    raise RegistryError(f"unknown builtin '{name}'")
            lock = None if manifest.reentrant else threading.Lock()
            self._entries[manifest.spec.id] = _Entry(manifest=manifest, lock=lock)

    def register_all(self, manifests: list[ToolManifest]) -> None:
        for m in manifests:
            self.register(m)

    @classmethod
    def from_file(cls, path: str) -> "ToolHost":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        host = cls()
        host.register_all([ToolManifest.from_dict(obj) for obj in raw])
        return host

    def has(self, tool_id: str) -> bool:
        return tool_id in self._entries

    def spec(self, tool_id: str) -> ToolSpec:
        entry = self._entries.get(tool_id)
        if entry is None:
            raise RegistryError(f"tool '{tool_id}' is not registered")
        return entry.manifest.spec

    def list_tools(self) -> list[ToolSpec]:
        return [self._entries[tid].manifest.spec for tid in sorted(self._entries)]

    def invoke(self, tool_id: str, inputs: dict[str, str]) -> ToolResult:
        entry = self._entries.get(tool_id)
        if entry is None:
            raise RegistryError(f"tool '{tool_id}' is not registered")
        spec = entry.manifest.spec
        missing = [fmt for fmt in spec.input_formats if fmt not in inputs]
        if missing:
            raise MissingInputError(tool_id, missing)
        if entry.lock is not None:
            with entry.lock:
                result = self._dispatch(entry, inputs)
        else:
            result = self._dispatch(entry, inputs)
        if result.ok:
            got = set(result.outputs)
            declared = set(spec.output_formats)
            if not got or got - declared or declared - got:
                raise OutputFormatViolation(
                    f"tool '{tool_id}' produced formats {sorted(got)}, declared {sorted(declared)}"
                )
        return result

    def _dispatch(self, entry: _Entry, inputs: dict[str, str]) -> ToolResult:
        manifest = entry.manifest
        if manifest.adapter == "builtin":
            return self._run_builtin(entry, inputs)
        if manifest.adapter == "process":
            return _run_process(manifest, inputs)
        return _run_http(manifest, inputs)

    def _run_builtin(self, entry: _Entry, inputs: dict[str, str]) -> ToolResult:
        name = entry.manifest.adapter_config["builtin"]
        spec = entry.manifest.spec
        if name == "flaky_once":
            # fails transiently on the first call per registered tool
            count = entry.state.get("calls", 0)
            entry.state["calls"] = count + 1
            if count == 0:
                return ToolResult(outputs={}, ok=False, transient=True, diagnostics="first-call fault")
            return ToolResult(outputs={fmt: f"{spec.id}/{fmt}:recovered" for fmt in spec.output_formats})
        if name == "concurrency_probe":
            import time as _time

            with self._probe_lock:
                self._probe_gauge += 1
                self.probe_max_concurrency = max(self.probe_max_concurrency, self._probe_gauge)
            _time.sleep(0.002)
            with self._probe_lock:
                self._probe_gauge -= 1
            return ToolResult(outputs={fmt: f"probe:{fmt}" for fmt in spec.output_formats})
        fn = BUILTINS[name]
        try:
            outputs = fn(spec, dict(inputs))
        except BuiltinFailure as e:
            return ToolResult(outputs={}, ok=False, transient=e.transient, diagnostics=str(e))
        return ToolResult(outputs={k: str(v) for k, v in outputs.items()})


def _run_process(manifest: ToolManifest, inputs: dict[str, str]) -> ToolResult:
    command = manifest.adapter_config["command"]
    timeout = manifest.adapter_config.get("timeout_s", 10)
    try:
        proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as e:
        return ToolResult(outputs={}, ok=False, transient=False, diagnostics=f"spawn failed: {e}")
    try:
        stdout, stderr = proc.communicate(json.dumps(inputs), timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
        return ToolResult(outputs={}, ok=False, transient=True,
                          diagnostics=f"timed out after {timeout}s (pid {proc.pid} killed)")
    if proc.returncode != 0:
        return ToolResult(outputs={}, ok=False, transient=False,
                          diagnostics=f"exit {proc.returncode}: {stderr.strip()[:500]}")
    return _parse_wire_output(stdout)


def _run_http(manifest: ToolManifest, inputs: dict[str, str]) -> ToolResult:
    import httpx

    endpoint = manifest.adapter_config["endpoint"]
    method = manifest.adapter_config.get("method", "POST").upper()
    timeout = manifest.adapter_config.get("timeout_s", 30)
    try:
        resp = httpx.request(method, endpoint, json=inputs, timeout=timeout)
        resp.raise_for_status()
    except Exception as e:  # noqa: BLE001 - network failures are retryable
        return ToolResult(outputs={}, ok=False, transient=True, diagnostics=f"http failure: {e}")
    return _parse_wire_output(resp.text)


def _parse_wire_output(raw: str) -> ToolResult:
    """Shared JSON result shape for process and http adapters."""
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as e:
        return ToolResult(outputs={}, ok=False, transient=False, diagnostics=f"bad JSON output: {e}")
    if not isinstance(body, dict):
        return ToolResult(outputs={}, ok=False, transient=False, diagnostics="output is not a JSON object")
    if "error" in body:
        return ToolResult(outputs={}, ok=False, transient=bool(body.get("transient", False)),
                          diagnostics=str(body["error"]))
    outputs = body.get("outputs", body)
    if not isinstance(outputs, dict):
        return ToolResult(outputs={}, ok=False, transient=False, diagnostics="outputs is not an object")
    return ToolResult(outputs={str(k): str(v) for k, v in outputs.items()})
