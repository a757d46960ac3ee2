#!/usr/bin/env python3
"""Regenerates the bundled toy knowledge graph, corpus and target datasets.

Output is deterministic for a given --seed. Run from any directory:

    python3 data/toy/generate_toy_data.py
"""
import argparse
import json
import random
from pathlib import Path

ENTITIES = {
    "drug": ["Metformin", "Imatinib", "Tamoxifen", "Gefitinib", "Rapamycin", "Aspirin", "Simvastatin",
             "Warfarin", "Lapatinib", "Bortezomib", "Celecoxib", "Lithium carbonate", "Valproic acid",
             "Olaparib", "Trastuzumab", "Dexamethasone", "Everolimus", "Sorafenib", "Cisplatin",
             "Paclitaxel", "Hydroxychloroquine", "Atorvastatin", "Sildenafil", "Ibuprofen", "Clopidogrel",
             "Losartan", "Fluoxetine", "Ruxolitinib", "Vemurafenib", "Methotrexate"],
    "gene": ["TP53", "BRCA1", "EGFR", "KRAS", "PTEN", "MTOR", "ERBB2", "ABL1", "BRAF", "PIK3CA", "JAK2",
             "VKORC1", "CYP2C9", "ESR1", "PARP1", "HMGCR", "PTGS2", "GSK3B", "HDAC1", "PSMB5", "NR3C1",
             "MYC", "CDKN2A", "AKT1", "STAT3", "SLC6A4", "AGTR1", "PDE5A", "P2RY12", "DHFR"],
    "disease": ["Type 2 diabetes", "Chronic myeloid leukemia", "Breast carcinoma", "Non-small cell lung cancer",
                "Tuberous sclerosis", "Colorectal cancer", "Hypercholesterolemia", "Atrial fibrillation",
                "Multiple myeloma", "Rheumatoid arthritis", "Bipolar disorder", "Epilepsy", "Ovarian cancer",
                "Melanoma", "Polycythemia vera", "Hepatocellular carcinoma", "Pulmonary hypertension",
                "Major depressive disorder", "Hypertension", "Systemic lupus erythematosus",
                "Coronary artery disease", "Psoriasis", "Glioblastoma", "Osteoarthritis", "Asthma",
                "Crohn disease", "Myelofibrosis", "Thrombosis", "Prostate cancer", "Alzheimer disease"],
    "pathway": ["AMPK signalling", "mTOR signalling", "MAPK cascade", "PI3K-AKT signalling", "JAK-STAT signalling",
                "Homologous recombination", "Cholesterol biosynthesis", "Prostaglandin synthesis",
                "Wnt signalling", "Apoptosis", "Ubiquitin-proteasome pathway", "Glucocorticoid receptor signalling",
                "Vitamin K cycle", "Folate metabolism", "Serotonin reuptake", "Renin-angiotensin system",
                "cGMP-PDE signalling", "Platelet activation", "Estrogen signalling", "Cell cycle checkpoint",
                "Histone deacetylation", "Inflammatory response", "Angiogenesis", "Autophagy",
                "Oxidative phosphorylation", "Insulin signalling", "NF-kB signalling", "Notch signalling",
                "Hedgehog signalling", "DNA mismatch repair"],
    "phenotype": ["Hyperglycemia", "Insulin resistance", "Lactic acidosis", "Bleeding tendency",
                  "Peripheral neuropathy", "Weight gain", "Hepatotoxicity", "Cardiotoxicity", "Neutropenia",
                  "Myopathy", "Gastric ulceration", "Hair loss", "Fatigue", "Nausea", "Tremor",
                  "Hyperlipidemia", "Photosensitivity", "QT prolongation", "Edema", "Anemia",
                  "Thrombocytopenia", "Skin rash", "Hypotension", "Insomnia", "Osteoporosis",
                  "Muscle weakness", "Cognitive decline", "Proteinuria", "Fever", "Dyspnea"],
}

EDGE_TYPES = {
    ("drug", "gene"): "targets",
    ("drug", "disease"): "treats",
    ("drug", "phenotype"): "has_side_effect",
    ("gene", "pathway"): "participates_in",
    ("gene", "disease"): "associated_with",
    ("pathway", "disease"): "implicated_in",
    ("disease", "phenotype"): "has_phenotype",
    ("gene", "gene"): "interacts_with",
    ("drug", "pathway"): "modulates",
    ("pathway", "phenotype"): "affects",
}

SENTENCES = [
    "{a} was examined in relation to {b} in a cohort of {n} patients",
    "Expression of {b} changed markedly after exposure to {a}",
    "These findings link {a} to {b} through {c}",
    "Loss of {c} attenuated the effect of {a} on {b}",
    "{a} and {b} were co-regulated across {n} cell lines",
    "The association between {b} and {c} persisted after adjustment for age",
    "Mechanistic studies implicated {c} in the response to {a}",
    "No significant interaction between {a} and {c} was detected",
]


def build_graph(rng):
    nodes = []
    for node_type, names in ENTITIES.items():
        for i, name in enumerate(names):
            nodes.append({"id": f"{node_type[:3].upper()}:{i + 1:04d}", "type": node_type, "name": name})
    by_type = {}
    for n in nodes:
        by_type.setdefault(n["type"], []).append(n)

    edges = set()
    for (ta, tb), etype in EDGE_TYPES.items():
        for a in by_type[ta]:
            for b in rng.sample(by_type[tb], 2):
                if a["id"] != b["id"]:
                    edges.add((a["id"], etype, b["id"]))
    # A hub that exceeds the upper degree threshold.
    hub = {"id": "PATH:HUB1", "type": "pathway", "name": "Signal transduction"}
    nodes.append(hub)
    for n in rng.sample([x for x in nodes if x["type"] == "gene" or x["type"] == "drug"], 45):
        edges.add((n["id"], "participates_in" if n["type"] == "gene" else "modulates", hub["id"]))
    for n in rng.sample([x for x in nodes if x["type"] == "disease" or x["type"] == "phenotype"], 58):
        edges.add((hub["id"], "implicated_in" if n["type"] == "disease" else "affects", n["id"]))
    # Leaves below the lower threshold.
    for i in range(6):
        leaf = {"id": f"PHE:LEAF{i + 1}", "type": "phenotype", "name": f"Rare finding {i + 1}"}
        nodes.append(leaf)
        edges.add((rng.choice(by_type["disease"])["id"], "has_phenotype", leaf["id"]))
    # A duplicated relation with another type and a reversed copy, collapsed by simplification.
    a, b = by_type["drug"][0]["id"], by_type["gene"][0]["id"]
    edges.add((a, "binds", b))
    edges.add((b, "targeted_by", a))
    return nodes, sorted(edges)


def write_graph(out, nodes, edges, rng):
    names = {}
    with open(out / "nodes.tsv", "w") as f:
        f.write("id\ttype\tname\n")
        for n in nodes:
            r = rng.random()
            if r < 0.35:  # name supplied by the hydration map
                names[n["id"]] = n["name"]
                f.write(f"{n['id']}\t{n['type']}\t\n")
            elif r < 0.38:  # never resolved
                f.write(f"{n['id']}\t{n['type']}\t\n")
            else:
                f.write(f"{n['id']}\t{n['type']}\t{n['name']}\n")
    with open(out / "names.tsv", "w") as f:
        f.write("id\tname\n")
        for node_id in sorted(names):
            f.write(f"{node_id}\t{names[node_id]}\n")
    with open(out / "edges.tsv", "w") as f:
        f.write("source\tedge_type\ttarget\n")
        for s, t, d in edges:
            f.write(f"{s}\t{t}\t{d}\n")


def write_corpus(out, nodes, edges, rng, count):
    by_id = {n["id"]: n for n in nodes}
    adjacency = {}
    for s, _, t in edges:
        adjacency.setdefault(s, []).append(t)
        adjacency.setdefault(t, []).append(s)
    ids = sorted(adjacency)
    with open(out / "corpus.jsonl", "w") as f:
        for i in range(count):
            a = by_id[rng.choice(ids)]
            b = by_id[rng.choice(adjacency[a["id"]])]
            c = by_id[rng.choice(adjacency[b["id"]])]
            names = {"a": a["name"], "b": b["name"], "c": c["name"]}
            sentences = []
            for template in rng.sample(SENTENCES, rng.randint(3, 5)):
                sentences.append(template.format(n=rng.randint(12, 900), **names))
            doc = {
                "doc_id": f"PMID{31000000 + i * 37}",
                "title": f"{a['name']} and {b['name']}: evidence from {rng.choice(['in vitro', 'cohort', 'murine', 'clinical'])} studies",
                "abstract": ". ".join(sentences) + ".",
            }
            f.write(json.dumps(doc, ensure_ascii=False) + "\n")


def write_targets(out, nodes, rng):
    drugs = [n for n in nodes if n["type"] == "drug"]
    diseases = [n for n in nodes if n["type"] == "disease"]
    with open(out / "yes_no_examples.jsonl", "w") as f:
        for i in range(24):
            d, s = rng.choice(drugs), rng.choice(diseases)
            label = rng.choice(["yes", "no"])
            f.write(json.dumps({
                "id": f"yn{i + 1:03d}",
                "question": f"Does {d['name']} improve outcomes in {s['name']}?",
                "context": f"A trial of {d['name']} in {s['name']} reported "
                           f"{'a significant benefit' if label == 'yes' else 'no significant difference'} "
                           f"versus placebo.",
                "label": label,
            }) + "\n")
    genes = [n for n in nodes if n["type"] == "gene"]
    with open(out / "mcq_examples.jsonl", "w") as f:
        for i in range(24):
            d = rng.choice(drugs)
            options = rng.sample(genes, 4)
            f.write(json.dumps({
                "id": f"mc{i + 1:03d}",
                "question": f"Which gene product is the primary target of {d['name']}?",
                "options": {letter: g["name"] for letter, g in zip("ABCD", options)},
                "answer": rng.choice("ABCD"),
            }) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent)
    parser.add_argument("--documents", type=int, default=240)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    nodes, edges = build_graph(rng)
    write_graph(args.out, nodes, edges, rng)
    write_corpus(args.out, nodes, edges, rng, args.documents)
    write_targets(args.out, nodes, rng)


if __name__ == "__main__":
    main()
