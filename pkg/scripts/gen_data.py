#!/usr/bin/env python3
"""Regenerates the bundled data files under src/toolweaver/data/.

Every benchmark item is replayed through the real engine before being frozen,
so the committed dataset and script table are verified consistent: the
mini-benchmark must score 1.0 on all three metrics or this script fails.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from toolweaver.bench import JudgeConfig, run_bench
from toolweaver.engine import Engine
from toolweaver.executor import RetryPolicy
from toolweaver.kg import load_graph
from toolweaver.planner import RetrievalParams
from toolweaver.providers import HashedEmbedder, ScriptedChatProvider
from toolweaver.safety.screen import SafeguardDB, SafetyContext, screen_molecule, screen_protein
from toolweaver.summarizer import SessionMemory
from toolweaver.toolhost import ToolHost, ToolManifest

DATA = Path(__file__).resolve().parents[1] / "src" / "toolweaver" / "data"


# ---------------------------------------------------------------- toy graph

TOY_TOOLS = [
    ("F", "crystal to smiles", "Convert crystal structure files into molecule strings.",
     ["convert a cif crystal structure file to smiles notation"], ["cif"], ["smiles"],
     "materials", "mock", "low", "cif_to_smiles"),
    ("A", "smiles to selfies", "Translate molecule strings between encodings.",
     ["translate smiles strings into selfies strings"], ["smiles"], ["selfies"],
     "chemistry", "mock", "low", "smiles_to_selfies"),
    ("C", "smiles to cas", "Resolve molecules to registry numbers.",
     ["resolve a smiles string to a cas registry number"], ["smiles"], ["cas"],
     "chemistry", "mock", "low", "smiles_to_cas"),
    ("B", "selfies caption", "Describe molecules in plain language.",
     ["describe a selfies molecule in plain text"], ["selfies"], ["text"],
     "chemistry", "mock", "low", "molecule_caption"),
    ("D", "cas safety info", "Look up compound safety records.",
     ["fetch safety information text for a cas number"], ["cas"], ["text"],
     "chemistry", "mock", "low", "cas_safety_info"),
    ("E", "text summarize", "Condense text.",
     ["summarize text into shorter text"], ["text"], ["text"],
     "general", "mock", "low", "text_echo"),
]


def tool_obj(tid, name, purpose, functions, ins, outs, category, source, risk):
    return {
        "id": tid, "name": name, "purpose": purpose, "functions": functions,
        "input_formats": ins, "output_formats": outs,
        "category": category, "source": source, "risk_level": risk,
    }


def schema_triples(tools):
    triples = []
    for t in tools:
        triples.append([t["id"], "has_category", t["category"]])
        triples.append([t["id"], "has_risk_level", t["risk_level"]])
        for fmt in t["input_formats"]:
            triples.append([t["id"], "has_input_format", fmt])
        for fmt in t["output_formats"]:
            triples.append([t["id"], "has_output_format", fmt])
    return triples


def write_toy():
    tools = [tool_obj(*t[:9]) for t in TOY_TOOLS]
    doc = {"schema_version": 1, "tools": tools, "triples": schema_triples(tools)}
    (DATA / "toykg6.json").write_text(json.dumps(doc, indent=2) + "\n")
    manifests = [
        {"spec": tool_obj(*t[:9]), "adapter": "builtin",
         "adapter_config": {"builtin": t[9]}, "reentrant": True}
        for t in TOY_TOOLS
    ]
    (DATA / "tools_toy.json").write_text(json.dumps(manifests, indent=2) + "\n")


# ---------------------------------------------------------------- demo graph

# (id, name, purpose, functions, ins, outs, category, source, risk, builtin)
DEMO_TOOLS = [
    # chemistry: synthesis and characterization
    ("reaction_predict", "reaction product predictor",
     "Predict the product of a described chemical reaction.",
     ["predict the major product smiles of a reaction described in text"],
     ["text"], ["smiles"], "chemistry", "rxn-mock", "high", "reaction_predict"),
    ("smiles_to_selfies", "smiles to selfies converter",
     "Convert molecule line notations.",
     ["translate a smiles string into a selfies string"],
     ["smiles"], ["selfies"], "chemistry", "encoder-mock", "low", "smiles_to_selfies"),
    ("molecule_caption", "molecule captioner",
     "Describe a molecule in natural language.",
     ["generate a plain text description of a selfies molecule"],
     ["selfies"], ["text"], "chemistry", "caption-mock", "low", "molecule_caption"),
    ("patent_check", "patent lookup",
     "Check patent databases for a compound.",
     ["search patent records for a smiles compound"],
     ["smiles"], ["text"], "chemistry", "patent-mock", "low", "patent_check"),
    ("smiles_to_cas", "cas number resolver",
     "Resolve molecules to CAS registry numbers.",
     ["convert a smiles string to a cas registry number"],
     ["smiles"], ["cas"], "chemistry", "registry-mock", "low", "smiles_to_cas"),
    ("cas_safety_info", "compound safety lookup",
     "Retrieve hazard and handling information.",
     ["fetch safety and hazard text for a cas number"],
     ["cas"], ["text"], "chemistry", "hazard-mock", "low", "cas_safety_info"),
    ("logp_predict", "logp predictor", "Estimate lipophilicity.",
     ["predict the octanol water partition coefficient of a smiles molecule"],
     ["smiles"], ["text"], "chemistry", "prop-mock", "low", "generic"),
    ("solubility_predict", "aqueous solubility predictor", "Estimate solubility.",
     ["predict aqueous solubility of a smiles molecule"],
     ["smiles"], ["text"], "chemistry", "prop-mock", "low", "generic"),
    ("pka_predict", "pka predictor", "Estimate acid dissociation constants.",
     ["predict pka values for a smiles molecule"],
     ["smiles"], ["text"], "chemistry", "prop-mock", "low", "generic"),
    ("toxicity_predict", "toxicity classifier", "Flag likely toxic compounds.",
     ["classify acute toxicity of a smiles molecule"],
     ["smiles"], ["text"], "chemistry", "tox-mock", "high", "generic"),
    ("nmr_predict", "nmr spectrum predictor", "Simulate NMR spectra.",
     ["predict an nmr spectrum for a smiles molecule"],
     ["smiles"], ["spectrum"], "chemistry", "spec-mock", "low", "generic"),
    ("ir_predict", "ir spectrum predictor", "Simulate IR spectra.",
     ["predict an infrared spectrum for a smiles molecule"],
     ["smiles"], ["spectrum"], "chemistry", "spec-mock", "low", "generic"),
    ("spectrum_match", "spectrum matcher", "Match spectra against references.",
     ["match a spectrum against reference libraries and report hits"],
     ["spectrum"], ["text"], "chemistry", "spec-mock", "low", "generic"),
    ("retro_synthesis", "retrosynthesis planner", "Propose synthetic routes.",
     ["propose retrosynthetic routes for a target smiles"],
     ["smiles"], ["text"], "chemistry", "route-mock", "high", "generic"),
    ("conformer_gen", "conformer generator", "Generate 3d conformers.",
     ["generate a low energy 3d conformer for a smiles molecule"],
     ["smiles"], ["xyz"], "chemistry", "geom-mock", "low", "generic"),
    ("dft_energy", "dft single point", "Compute electronic energies.",
     ["compute a single point energy for an xyz geometry"],
     ["xyz"], ["text"], "chemistry", "qc-mock", "low", "generic"),
    ("docking_score", "docking scorer", "Score ligand binding.",
     ["dock a smiles ligand into a target and report the score"],
     ["smiles"], ["text"], "chemistry", "dock-mock", "low", "generic"),
    # chemistry: ML reactivity pipeline
    ("dataset_load", "dataset loader",
     "Load a named reaction dataset for modeling.",
     ["load a reaction dataset described in text and return a csv handle"],
     ["text"], ["csv"], "chemistry", "data-mock", "low", "dataset_load"),
    ("molecule_features", "molecular featurizer",
     "Compute molecular feature matrices.",
     ["compute molecular features of a chosen kind for a csv dataset"],
     ["csv", "feature_kind"], ["features"], "chemistry", "feat-mock", "low", "molecule_features"),
    ("train_eval_classifier", "classifier trainer",
     "Train and evaluate a classifier.",
     ["train a named algorithm on a feature matrix and report accuracy"],
     ["features", "algo"], ["text"], "chemistry", "ml-mock", "low", "train_eval_classifier"),
    # biology
    ("protein_generate", "protein sequence generator",
     "Generate protein sequences from a design brief.",
     ["generate a protein sequence matching a textual design brief"],
     ["text"], ["sequence"], "biology", "gen-mock", "high", "protein_generate"),
    ("unfolding_energy", "mechanical stability estimator",
     "Estimate unfolding force and energy.",
     ["estimate unfolding force and energy for a protein sequence"],
     ["sequence"], ["text"], "biology", "mech-mock", "low", "unfolding_energy"),
    ("fold_structure", "structure predictor",
     "Predict 3d protein structure.",
     ["predict the folded structure of a protein sequence"],
     ["sequence"], ["structure"], "biology", "fold-mock", "low", "fold_structure"),
    ("vibration_modes", "vibrational mode analyzer",
     "Compute vibrational frequencies of a structure.",
     ["compute the lowest vibrational frequencies of a protein structure"],
     ["structure"], ["text"], "biology", "anm-mock", "low", "vibration_modes"),
    ("secondary_structure", "secondary structure analyzer",
     "Quantify secondary structure content.",
     ["report helix sheet and coil percentages for a protein structure"],
     ["structure"], ["text"], "biology", "dssp-mock", "low", "secondary_structure"),
    ("blast_search", "sequence homology search", "Find similar sequences.",
     ["search sequence databases for homologs of a protein sequence"],
     ["sequence"], ["text"], "biology", "blast-mock", "low", "generic"),
    ("msa_align", "multiple sequence aligner", "Build alignments.",
     ["build a multiple sequence alignment from a protein sequence"],
     ["sequence"], ["msa"], "biology", "msa-mock", "low", "generic"),
    ("phylo_tree", "phylogenetic tree builder", "Infer phylogenies.",
     ["infer a phylogenetic tree from a multiple sequence alignment"],
     ["msa"], ["text"], "biology", "tree-mock", "low", "generic"),
    ("codon_optimize", "codon optimizer", "Optimize coding sequences.",
     ["codon optimize a protein sequence for expression"],
     ["sequence"], ["sequence"], "biology", "codon-mock", "low", "generic"),
    ("primer_design", "primer designer", "Design PCR primers.",
     ["design pcr primers for a target sequence"],
     ["sequence"], ["text"], "biology", "primer-mock", "low", "generic"),
    ("gene_annotate", "gene annotator", "Annotate sequence features.",
     ["annotate functional features on a sequence"],
     ["sequence"], ["text"], "biology", "annot-mock", "low", "generic"),
    ("rna_fold", "rna structure predictor", "Fold RNA.",
     ["predict secondary structure for an rna sequence"],
     ["sequence"], ["structure"], "biology", "rna-mock", "low", "generic"),
    ("epitope_predict", "epitope predictor", "Predict immunogenic regions.",
     ["predict linear epitopes in a protein sequence"],
     ["sequence"], ["text"], "biology", "epi-mock", "low", "generic"),
    ("signal_peptide", "signal peptide detector", "Detect signal peptides.",
     ["detect signal peptides in a protein sequence"],
     ["sequence"], ["text"], "biology", "sig-mock", "low", "generic"),
    ("structure_compare", "structure comparator", "Superpose structures.",
     ["compare a protein structure against known folds"],
     ["structure"], ["text"], "biology", "cmp-mock", "low", "generic"),
    # materials
    ("mof_list", "framework catalog lookup",
     "Fetch candidate framework structures.",
     ["retrieve a candidate metal organic framework cif for a described screening task"],
     ["text"], ["cif"], "materials", "mofdb-mock", "low", "mof_list"),
    ("thermal_stability", "thermal stability predictor",
     "Predict framework thermal stability.",
     ["predict the thermal stability of a cif framework"],
     ["cif"], ["text"], "materials", "stab-mock", "low", "thermal_stability"),
    ("gas_adsorption", "gas adsorption simulator",
     "Simulate gas uptake.",
     ["simulate co2 adsorption capacity for a cif framework"],
     ["cif"], ["text"], "materials", "gcmc-mock", "low", "gas_adsorption"),
    ("cif_to_smiles", "linker extractor",
     "Extract organic linkers from frameworks.",
     ["convert a cif framework to the smiles of its organic linker"],
     ["cif"], ["smiles"], "materials", "linker-mock", "low", "cif_to_smiles"),
    ("price_lookup", "chemical price lookup",
     "Query commercial prices.",
     ["look up the market price for a cas number"],
     ["cas"], ["text"], "materials", "price-mock", "low", "price_lookup"),
    ("xrd_simulate", "xrd pattern simulator", "Simulate diffraction.",
     ["simulate an x ray diffraction pattern for a cif structure"],
     ["cif"], ["spectrum"], "materials", "xrd-mock", "low", "generic"),
    ("pore_analysis", "pore geometry analyzer", "Measure pores.",
     ["compute pore diameters and volumes for a cif structure"],
     ["cif"], ["text"], "materials", "pore-mock", "low", "generic"),
    ("surface_area_calc", "surface area calculator", "Compute surface areas.",
     ["compute accessible surface area for a cif structure"],
     ["cif"], ["text"], "materials", "area-mock", "low", "generic"),
    ("bandgap_predict", "band gap predictor", "Estimate band gaps.",
     ["predict the electronic band gap of a cif structure"],
     ["cif"], ["text"], "materials", "band-mock", "low", "generic"),
    ("elastic_predict", "elastic constants predictor", "Estimate stiffness.",
     ["predict elastic constants for a cif structure"],
     ["cif"], ["text"], "materials", "elas-mock", "low", "generic"),
    ("phonon_spectrum", "phonon spectrum calculator", "Compute phonons.",
     ["compute a phonon spectrum for a cif structure"],
     ["cif"], ["spectrum"], "materials", "phon-mock", "low", "generic"),
    ("relax_structure", "structure relaxer", "Relax atomic positions.",
     ["relax a cif structure and return the optimized cif"],
     ["cif"], ["cif"], "materials", "relax-mock", "low", "generic"),
    ("supercell_build", "supercell builder", "Expand unit cells.",
     ["build a supercell cif from a unit cell cif"],
     ["cif"], ["cif"], "materials", "cell-mock", "low", "generic"),
    ("water_stability", "water stability classifier", "Assess hydrolytic stability.",
     ["classify water stability of a cif framework"],
     ["cif"], ["text"], "materials", "water-mock", "low", "generic"),
    ("structure_visualize", "structure visualizer", "Render structures.",
     ["render a cif structure and describe notable motifs"],
     ["cif"], ["text"], "materials", "viz-mock", "low", "generic"),
    # general
    ("web_search", "web search",
     "Search the web and summarize results.",
     ["search the web for a textual query and summarize findings"],
     ["text"], ["text"], "general", "search-mock", "low", "web_search"),
    ("report_writer", "report writer",
     "Assemble gathered text into a report.",
     ["compose a structured report from input text"],
     ["text"], ["text"], "general", "report-mock", "low", "text_echo"),
    ("literature_search", "literature search", "Search scientific literature.",
     ["search scientific literature for a textual query"],
     ["text"], ["text"], "general", "lit-mock", "low", "generic"),
    ("unit_convert", "unit converter", "Convert physical units.",
     ["convert quantities between units described in text"],
     ["text"], ["text"], "general", "unit-mock", "low", "generic"),
    ("table_extract", "table extractor", "Pull tables out of text.",
     ["extract tabular data from text into csv"],
     ["text"], ["csv"], "general", "table-mock", "low", "generic"),
    ("plot_data", "plotter", "Plot csv data.",
     ["plot a csv dataset and describe the figure"],
     ["csv"], ["text"], "general", "plot-mock", "low", "generic"),
    ("stats_summary", "statistics summarizer", "Summarize datasets.",
     ["compute summary statistics for a csv dataset"],
     ["csv"], ["text"], "general", "stats-mock", "low", "generic"),
    ("translate_text", "translator", "Translate text.",
     ["translate text between languages"],
     ["text"], ["text"], "general", "trans-mock", "low", "generic"),
    ("citation_format", "citation formatter", "Format references.",
     ["format citations found in text"],
     ["text"], ["text"], "general", "cite-mock", "low", "generic"),
    ("keyword_extract", "keyword extractor", "Extract key phrases.",
     ["extract keywords from text"],
     ["text"], ["text"], "general", "key-mock", "low", "generic"),
]

CAN_PRECEDE_EDGES = [
    # sequential dependencies that format intersection alone does not give
    ("molecule_caption", "patent_check"),
    ("patent_check", "smiles_to_cas"),
    ("unfolding_energy", "fold_structure"),
    ("vibration_modes", "secondary_structure"),
    ("thermal_stability", "gas_adsorption"),
    ("gas_adsorption", "cif_to_smiles"),
]


def write_demo():
    tools = [tool_obj(*t[:9]) for t in DEMO_TOOLS]
    triples = schema_triples(tools)
    triples += [[a, "can_precede", b] for a, b in CAN_PRECEDE_EDGES]
    doc = {"schema_version": 1, "tools": tools, "triples": triples}
    (DATA / "demo.json").write_text(json.dumps(doc, indent=2) + "\n")
    manifests = [
        {"spec": tool_obj(*t[:9]), "adapter": "builtin",
         "adapter_config": {"builtin": t[9]}, "reentrant": True}
        for t in DEMO_TOOLS
    ]
    (DATA / "tools_demo.json").write_text(json.dumps(manifests, indent=2) + "\n")
    return doc


# ---------------------------------------------------------------- safeguard db

SAFEGUARD_MOLECULES = [
    ("mol_chlorophenol4", "Oc1ccc(Cl)cc1"),
    ("mol_phenol", "Oc1ccccc1"),
    ("mol_phosgene", "O=C(Cl)Cl"),
    ("mol_hydrogen_cyanide", "C#N"),
    ("mol_formaldehyde", "C=O"),
    ("mol_methanol", "CO"),
    ("mol_benzene", "c1ccccc1"),
    ("mol_methyl_isocyanate", "CN=C=O"),
    ("mol_chloroform", "ClC(Cl)Cl"),
    ("mol_carbon_tet", "ClC(Cl)(Cl)Cl"),
    ("mol_aniline", "Nc1ccccc1"),
    ("mol_nitrobenzene", "O=[N+]([O-])c1ccccc1"),
    ("mol_hydrazine", "NN"),
    ("mol_acrolein", "C=CC=O"),
    ("mol_acrylonitrile", "C=CC#N"),
    ("mol_ethylene_oxide", "C1CO1"),
    ("mol_vinyl_chloride", "C=CCl"),
    ("mol_dichloroethane", "ClCCCl"),
    ("mol_dimethyl_sulfate", "COS(=O)(=O)OC"),
    ("mol_methyl_bromide", "CBr"),
    ("mol_allyl_alcohol", "C=CCO"),
    ("mol_chloropicrin", "O=[N+]([O-])C(Cl)(Cl)Cl"),
    ("mol_hexachlorobenzene", "Clc1c(Cl)c(Cl)c(Cl)c(Cl)c1Cl"),
    ("mol_pentachlorophenol", "Oc1c(Cl)c(Cl)c(Cl)c(Cl)c1Cl"),
    ("mol_dichlorophenol24", "Oc1ccc(Cl)cc1Cl"),
    ("mol_cresol", "Cc1ccccc1O"),
    ("mol_catechol", "Oc1ccccc1O"),
    ("mol_nitromethane", "C[N+](=O)[O-]"),
]

SAFEGUARD_PROTEINS = [
    ("prot_tox_a01", "MKCKICNFDTCPKVHLACGHLFCGACIIKW"),
    ("prot_tox_a02", "MDNKLLVLFFVATIVLAIEAGPYGANMEDSV"),
    ("prot_tox_a03", "MKTLLLTLVVVTIVCLDLGYTLKCNKLVPLFY"),
    ("prot_tox_a04", "MQCKTCSFDTCPNSELCPDGKNICVKRSWTAV"),
    ("prot_tox_a05", "MKILLFCVVVIFISLDLGYTRICFNHQSSQPQ"),
    ("prot_tox_a06", "MGCTLSAEDKAAVERSKMIDRNLREDGEKAA"),
    ("prot_tox_a07", "MALWMRLLPLLALLALWGPDPAAAFVNQHLC"),
    ("prot_tox_a08", "MKVLVLACLVALALARELEELNVPGEIVESL"),
    ("prot_tox_a09", "MNSFSTSAFGPVAFSLGLLLVLPAAFPAPVP"),
    ("prot_tox_a10", "MKAAVLTLAVLFLTGSQARHFWQQDEPPQSP"),
    ("prot_tox_b01", "MYRKLAVISAFLATARAQSACTLQSETHPPL"),
    ("prot_tox_b02", "MFHLRLISCLLLLGLALAGERDCRVSSFRVK"),
    ("prot_tox_b03", "MEEWQKIDRELHSLHRDEFPGWYGKIDSTGA"),
    ("prot_tox_b04", "MKIIYLLFALLFSSCFAQQAEQNDKRFDNLT"),
    ("prot_tox_b05", "MNTKYILALSLFMLVSMVYGEECGKHSQPCA"),
    ("prot_tox_b06", "MRSLLILVLCFLPLAALGKVFERCELARTLK"),
    ("prot_tox_b07", "MKFLVNVALVFMVVYISYIYADPVKQDPNVR"),
    ("prot_tox_b08", "MRFTTLLPLLLLLSLLIPTAEGHIIDTTMKP"),
    ("prot_tox_b09", "MAVMAPRTLVLLLSGALALTQTWAGSHSMRY"),
    ("prot_tox_b10", "MTSKVAIFGLLFSLLVLVPSQIFAEEDKKEE"),
    ("prot_tox_b11", "MKGIFFVLLAIGIVSGLPQNDLEELLRNSFG"),
    ("prot_tox_b12", "MKSLIFALAVLSVVSPQALGQDRCTRESNPC"),
]


def write_safeguard():
    doc = {
        "note": "illustrative miniature safeguard corpus for desk-scale testing",
        "molecules": [{"id": i, "smiles": s} for i, s in SAFEGUARD_MOLECULES],
        "proteins": [{"id": i, "sequence": s} for i, s in SAFEGUARD_PROTEINS],
    }
    (DATA / "safeguard_db.json").write_text(json.dumps(doc, indent=2) + "\n")
    db = SafeguardDB.from_file(str(DATA / "safeguard_db.json"))
    # every entry must self-flag at 1.0
    for mid, smiles in SAFEGUARD_MOLECULES:
        v = screen_molecule(smiles, db)
        assert v.score == 1.0 and v.flagged, (mid, v)
    for pid, seq in SAFEGUARD_PROTEINS:
        v = screen_protein(seq, db)
        assert v.score == 1.0 and v.flagged, (pid, v)
    # values flowing through bundled mock chains must stay unflagged
    clean_smiles = ["CC(=O)Oc1ccccc1C(=O)O", "c1ccc2ccccc2c1",
                    "CCO", "CCN", "CCC", "CC(C)O", "CC(=O)C", "CCOC(=O)C", "CCCCO"]
    for s in clean_smiles:
        v = screen_molecule(s, db)
        assert not v.flagged, (s, v.score, v.matched)
        print(f"  clean molecule {s}: score {v.score:.4f}")
    for seq in ["MKELVRKLEEEVKKLEEEVKKLEG", "MTEVTVKVDTVTVKVDTVTVKVGS"]:
        v = screen_protein(seq, db)
        assert not v.flagged, (seq, v.score, v.matched)
        print(f"  clean protein {seq}: score {v.score:.4f}")
    return db


# ---------------------------------------------------------------- mini benchmark

def bench_items():
    """Item definitions: question, chain, extraction scripts, answer template.

    The answer template gets '.format(**outs)' where outs maps 'sN_fmt' to the
    output value of step N.
    """
    return [
        # -------- level 1
        dict(id="b01", level=1,
             question="What is the CAS registry number for aspirin, smiles CC(=O)Oc1ccccc1C(=O)O?",
             chain=["smiles_to_cas"],
             inputs={"smiles_to_cas": {"smiles": "CC(=O)Oc1ccccc1C(=O)O"}},
             answer="The CAS registry number for aspirin (acetylsalicylic acid) is {s0_cas}.",
             key_facts=["50-78-2", "acetylsalicylic"]),
        dict(id="b02", level=1,
             question="How much does the naphthalene linker with CAS 7135-25-5 cost per gram?",
             chain=["price_lookup"],
             inputs={"price_lookup": {"cas": "7135-25-5"}},
             answer="Commercial pricing for CAS 7135-25-5: {s0_text}.",
             key_facts=["86 per gram"]),
        dict(id="b03", level=1,
             question="Predict the thermal stability of the framework TBAPy_Ti.cif.",
             chain=["thermal_stability"],
             inputs={"thermal_stability": {"cif": "TBAPy_Ti.cif"}},
             answer="For TBAPy_Ti.cif the model reports: {s0_text}.",
             key_facts=["486"]),
        dict(id="b04", level=1,
             question="Estimate the unfolding force for the sequence MKELVRKLEEEVKKLEEEVKKLEG.",
             chain=["unfolding_energy"],
             inputs={"unfolding_energy": {"sequence": "MKELVRKLEEEVKKLEEEVKKLEG"}},
             answer="Mechanical stability estimate: {s0_text}.",
             key_facts=None),  # filled from outputs
        dict(id="b05", level=1,
             question="Search the web for recent studies on mof based water harvesting.",
             chain=["web_search"],
             inputs={"web_search": {"text": "recent studies on mof based water harvesting"}},
             answer="Here is what the search returned: {s0_text}",
             key_facts=None),
        dict(id="b06", level=1,
             question="Describe the molecule encoded by the aspirin selfies string.",
             chain=["molecule_caption"],
             inputs={"molecule_caption": {"selfies": "__ASPIRIN_SELFIES__"}},
             answer="Caption: {s0_text}.",
             key_facts=["acetylsalicylic"]),
        # -------- level 2
        dict(id="b07", level=2,
             question="Predict the product of salicylic acid + acetic anhydride, describe it, check patents, and assess its safety.",
             chain=["reaction_predict", "smiles_to_selfies", "molecule_caption",
                    "patent_check", "smiles_to_cas", "cas_safety_info"],
             inputs={"reaction_predict": {"text": "salicylic acid + acetic anhydride"}},
             answer=("The predicted product is {s0_smiles} ({s2_text}). Patent status: {s3_text}. "
                     "Its CAS number is {s4_cas} and safety review says: {s5_text}."),
             key_facts=["50-78-2", "acetylsalicylic", "not classified as explosive"]),
        dict(id="b08", level=2,
             question="Design an alpha helix scaffold protein and characterize its stability, structure and secondary structure.",
             chain=["protein_generate", "unfolding_energy", "fold_structure",
                    "vibration_modes", "secondary_structure"],
             inputs={"protein_generate": {"text": "alpha helix scaffold"}},
             answer=("Generated sequence {s0_sequence}. Mechanics: {s1_text}. "
                     "Predicted structure {s2_structure}. Dynamics: {s3_text}. Composition: {s4_text}."),
             key_facts=["MKELVRKLEEEVKKLEEEVKKLEG"]),
        dict(id="b09", level=2,
             question="Screen the porous framework candidates for thermal stability, co2 uptake and linker price.",
             chain=["mof_list", "thermal_stability", "gas_adsorption",
                    "cif_to_smiles", "smiles_to_cas", "price_lookup"],
             inputs={"mof_list": {"text": "porous framework candidates"}},
             answer=("Candidate {s0_cif}: {s1_text}; {s2_text}. Linker {s3_smiles} "
                     "(CAS {s4_cas}) costs: {s5_text}."),
             key_facts=["TBAPy_Ti.cif", "486", "142 mg/g", "86 per gram"]),
        dict(id="b10", level=2,
             question="Train an mlp on electrical descriptors of the amide coupling screen and report accuracy.",
             chain=["dataset_load", "molecule_features", "train_eval_classifier"],
             inputs={"dataset_load": {"text": "amide coupling screen"},
                     "molecule_features": {"feature_kind": "electrical descriptors"},
                     "train_eval_classifier": {"algo": "mlp"}},
             answer="Trained on {s1_features}: {s2_text}.",
             key_facts=None),
        dict(id="b11", level=2,
             question="Train a random forest on electrical descriptors of the amide coupling screen and report accuracy.",
             chain=["dataset_load", "molecule_features", "train_eval_classifier"],
             inputs={"dataset_load": {"text": "amide coupling screen"},
                     "molecule_features": {"feature_kind": "electrical descriptors"},
                     "train_eval_classifier": {"algo": "random forest"}},
             answer="Trained on {s1_features}: {s2_text}.",
             key_facts=None),
        dict(id="b12", level=2,
             question="Predict the product of ethanol + acetic acid and give its CAS number.",
             chain=["reaction_predict", "smiles_to_cas"],
             inputs={"reaction_predict": {"text": "ethanol + acetic acid"}},
             answer="Predicted product {s0_smiles}, CAS {s1_cas}.",
             key_facts=None),
        dict(id="b13", level=2,
             question="Extract the linker of TBAPy_Ti.cif and describe it in words.",
             chain=["cif_to_smiles", "smiles_to_selfies", "molecule_caption"],
             inputs={"cif_to_smiles": {"cif": "TBAPy_Ti.cif"}},
             answer="The linker is {s0_smiles}; {s2_text}.",
             key_facts=None),
        dict(id="b14", level=2,
             question="Design a beta sheet scaffold protein and report its fold and secondary structure.",
             chain=["protein_generate", "fold_structure", "secondary_structure"],
             inputs={"protein_generate": {"text": "beta sheet scaffold"}},
             answer="Sequence {s0_sequence} folds to {s1_structure}; {s2_text}.",
             key_facts=["MTEVTVKVDTVTVKVDTVTVKVGS"]),
        dict(id="b15", level=2,
             question="Fetch the porous framework candidates and simulate their co2 adsorption.",
             chain=["mof_list", "gas_adsorption"],
             inputs={"mof_list": {"text": "porous framework candidates"}},
             answer="For {s0_cif}: {s1_text}.",
             key_facts=["142 mg/g"]),
        dict(id="b16", level=2,
             question="Find the CAS number of phenol Oc1ccccc1 and summarize its hazards.",
             chain=["smiles_to_cas", "cas_safety_info"],
             inputs={"smiles_to_cas": {"smiles": "Oc1ccccc1"}},
             answer="Phenol has CAS {s0_cas}. Hazards: {s1_text}.",
             key_facts=["108-95-2", "severe burns"]),
        dict(id="b17", level=2,
             question="What does aspirin cost per gram? Its smiles is CC(=O)Oc1ccccc1C(=O)O.",
             chain=["smiles_to_cas", "price_lookup"],
             inputs={"smiles_to_cas": {"smiles": "CC(=O)Oc1ccccc1C(=O)O"}},
             answer="Aspirin (CAS {s0_cas}): {s1_text}.",
             key_facts=["50-78-2"]),
        dict(id="b18", level=2,
             question="Search for mof adsorption reviews and compile the findings into a report.",
             chain=["web_search", "report_writer"],
             inputs={"web_search": {"text": "mof adsorption reviews"}},
             answer="Report: {s1_text}",
             key_facts=None),
        dict(id="b19", level=2,
             question="Assess mechanics, fold and dynamics of the sequence MTEVTVKVDTVTVKVDTVTVKVGS.",
             chain=["unfolding_energy", "fold_structure", "vibration_modes"],
             inputs={"unfolding_energy": {"sequence": "MTEVTVKVDTVTVKVDTVTVKVGS"},
                     "fold_structure": {"sequence": "MTEVTVKVDTVTVKVDTVTVKVGS"}},
             answer="Mechanics: {s0_text}. Structure {s1_structure}. Dynamics: {s2_text}.",
             key_facts=None),
        dict(id="b20", level=2,
             question="Compute morgan fingerprints for the amide coupling screen dataset.",
             chain=["dataset_load", "molecule_features"],
             inputs={"dataset_load": {"text": "amide coupling screen"},
                     "molecule_features": {"feature_kind": "morgan fingerprints"}},
             answer="Feature matrix ready: {s1_features}.",
             key_facts=None),
    ]


def build_engine(kg_doc, db, script_table, fallback=""):
    kg = load_graph(json.dumps(kg_doc))
    host = ToolHost()
    with open(DATA / "tools_demo.json", "r", encoding="utf-8") as fh:
        host.register_all([ToolManifest.from_dict(o) for o in json.load(fh)])
    return Engine(
        kg=kg,
        toolhost=host,
        chat=ScriptedChatProvider(table=script_table, fallback=fallback),
        embedder=HashedEmbedder(),
        params=RetrievalParams(),
        retry_policy=RetryPolicy(),
        safety_ctx=SafetyContext(db),
        max_refinements=3,
    )


def write_minibench(kg_doc, db):
    from toolweaver.executor import run_chain
    from toolweaver.planner import ToolChain
    from toolweaver.toolhost import _selfies_encode

    items = bench_items()
    dataset = []
    scripts: dict[str, str] = {}

    for item in items:
        q = item["question"]
        # resolve placeholders in scripted extraction values
        inputs_map = {}
        for tool, kv in item["inputs"].items():
            inputs_map[tool] = {
                fmt: (_selfies_encode("CC(=O)Oc1ccccc1C(=O)O") if value == "__ASPIRIN_SELFIES__" else value)
                for fmt, value in kv.items()
            }
        table = {f"PLAN: {q}": "CHAIN: " + " -> ".join(item["chain"])}
        for tool, kv in inputs_map.items():
            table[f"INPUTS {tool}: {q}"] = "\n".join(f"{fmt}={value}" for fmt, value in kv.items())

        # dry-run the chain on a throwaway engine to learn the step outputs
        probe = build_engine(kg_doc, db, dict(table))
        chain = ToolChain(steps=[(t, "") for t in item["chain"]], query=q)
        trace = run_chain(chain, q, probe.toolhost, probe.kg, probe.chat,
                          probe.retry_policy, probe.safety_ctx)
        assert trace.overall == "completed", (item["id"], trace.to_dict())
        outs = {}
        for step in trace.steps:
            for fmt, value in step.outputs.items():
                outs[f"s{step.index}_{fmt}"] = value
        answer_text = item["answer"].format(**outs)
        key_facts = item["key_facts"] or [outs[max(outs)] if outs else ""]
        if item["key_facts"] is None:
            # default to the last step's first output value as the key fact
            last = trace.steps[-1]
            key_facts = [sorted(last.outputs.values())[0]]
        for fact in key_facts:
            assert fact.lower() in answer_text.lower(), (item["id"], fact, answer_text)

        table[f"SUMMARIZE: {q}"] = answer_text
        table[f"ASSESS 0: {q}"] = "VERDICT: success"
        scripts.update(table)
        dataset.append({
            "id": item["id"], "level": item["level"], "question": q,
            "reference_chain": item["chain"], "reference_answer": answer_text,
            "key_facts": key_facts,
        })

    (DATA / "minibench.json").write_text(json.dumps(dataset, indent=2) + "\n")
    (DATA / "minibench_scripts.json").write_text(json.dumps(scripts, indent=2) + "\n")

    # verify: full benchmark must be perfect and deterministic
    engine = build_engine(kg_doc, db, scripts)
    report = run_bench(str(DATA / "minibench.json"), engine, JudgeConfig())
    assert report.pass_rate == 1.0, report.to_table()
    assert report.plan_accuracy == 1.0, report.to_table()
    assert report.answer_accuracy == 1.0, report.to_table()
    print(report.to_table())
    levels = [d["level"] for d in dataset]
    assert levels.count(1) == 6 and levels.count(2) == 14


# ---------------------------------------------------------------- case studies

def write_case_studies(kg_doc, db):
    scenarios = []

    protein_q = "Design an alpha helix scaffold protein and characterize its stability, structure and secondary structure."
    ml_q = "Train an mlp on electrical descriptors of the amide coupling screen and report accuracy."
    synth_q = "Predict the product of phenol + chlorine, describe it, and assess its safety."
    mof_q = "Screen the porous framework candidates for thermal stability, co2 uptake and linker price."

    synth_chain = ["reaction_predict", "smiles_to_selfies", "molecule_caption",
                   "patent_check", "smiles_to_cas", "cas_safety_info"]
    scenarios.append(dict(
        name="protein_pipeline", query=protein_q, blocked=False,
        chain=["protein_generate", "unfolding_energy", "fold_structure",
               "vibration_modes", "secondary_structure"],
        scripts={
            f"PLAN: {protein_q}": "CHAIN: protein_generate -> unfolding_energy -> fold_structure -> vibration_modes -> secondary_structure",
            f"INPUTS protein_generate: {protein_q}": "text=alpha helix scaffold",
            f"SUMMARIZE: {protein_q}": "The designed helix scaffold was generated, folded and analyzed end to end.",
            f"ASSESS 0: {protein_q}": "VERDICT: success",
        }))
    scenarios.append(dict(
        name="reactivity_ml_pipeline", query=ml_q, blocked=False,
        chain=["dataset_load", "molecule_features", "train_eval_classifier"],
        scripts={
            f"PLAN: {ml_q}": "CHAIN: dataset_load -> molecule_features -> train_eval_classifier",
            f"INPUTS dataset_load: {ml_q}": "text=amide coupling screen",
            f"INPUTS molecule_features: {ml_q}": "feature_kind=electrical descriptors",
            f"INPUTS train_eval_classifier: {ml_q}": "algo=mlp",
            f"SUMMARIZE: {ml_q}": "The mlp was trained on electrical descriptors and its accuracy recorded.",
            f"ASSESS 0: {ml_q}": "VERDICT: success",
        }))
    scenarios.append(dict(
        name="synthesis_safety_pipeline", query=synth_q, blocked=True,
        chain=synth_chain,
        scripts={
            f"PLAN: {synth_q}": "CHAIN: " + " -> ".join(synth_chain),
            f"INPUTS reaction_predict: {synth_q}": "text=phenol + chlorine",
            f"SUMMARIZE: {synth_q}": "The predicted chlorination product matches a hazardous safeguard entry, so execution stopped.",
            # the blocked trace fails by rule; the refinement returns the same chain
            f"REFINE 1: {synth_q}": "CHAIN: " + " -> ".join(synth_chain),
        }))
    scenarios.append(dict(
        name="mof_screening_pipeline", query=mof_q, blocked=False,
        chain=["mof_list", "thermal_stability", "gas_adsorption",
               "cif_to_smiles", "smiles_to_cas", "price_lookup"],
        scripts={
            f"PLAN: {mof_q}": "CHAIN: mof_list -> thermal_stability -> gas_adsorption -> cif_to_smiles -> smiles_to_cas -> price_lookup",
            f"INPUTS mof_list: {mof_q}": "text=porous framework candidates",
            f"SUMMARIZE: {mof_q}": "TBAPy_Ti.cif passes the stability, uptake and price screen.",
            f"ASSESS 0: {mof_q}": "VERDICT: success",
        }))

    (DATA / "case_studies.json").write_text(json.dumps(scenarios, indent=2) + "\n")

    # verify each scenario end to end
    for sc in scenarios:
        engine = build_engine(kg_doc, db, sc["scripts"])
        answer, traces = engine.run_session_query(SessionMemory(session_id=sc["name"]), sc["query"])
        if sc["blocked"]:
            statuses = [s.status for t in traces for s in t.steps]
            assert "blocked_by_safety" in statuses, (sc["name"], statuses)
            assert "SAFETY WARNING" in answer.text, answer.text
            assert answer.best_effort
        else:
            assert traces[-1].overall == "completed", (sc["name"],)
            assert not answer.best_effort, (sc["name"], answer.failure_reasons)
            assert traces[-1].chain.tool_ids() == sc["chain"]
        print(f"  scenario {sc['name']}: ok ({len(traces)} round(s))")


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    print("writing toy graph")
    write_toy()
    print("writing demo graph")
    kg_doc = write_demo()
    kg = load_graph((DATA / "demo.json").read_text())
    print(f"  demo graph: {len(kg.tools)} tools, {len(kg.compat)} compat edges")
    from toolweaver.kg import validate_graph
    violations = validate_graph(kg)
    assert not violations, violations[:5]
    print("writing safeguard db")
    db = write_safeguard()
    print("writing mini benchmark")
    write_minibench(kg_doc, db)
    print("writing case studies")
    write_case_studies(kg_doc, db)
    print("done")


if __name__ == "__main__":
    main()
