"""Thread parser service for turning raw discussion dumps into comment trees."""

import json
import logging
import re
from collections import Counter, OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from models import Comment, Corpus, DiscussionTree, TokenizerConfig, Vocabulary
from utils.stopwords import DEFAULT_STOPWORDS

logger = logging.getLogger(__name__)

FORMATS = ("generic-jsonl", "pushshift")
PUSHSHIFT_PREFIXES = ("t1_", "t3_")
TOKEN_PATTERN = re.compile(r"[^\W_]+")


@dataclass
class ParseReport:
    """Counts of what the parser accepted and dropped"""

    records: int = 0
    accepted: int = 0
    malformed: int = 0
    duplicate_ids: int = 0
    cyclic_threads: int = 0
    orphans_dropped: int = 0
    extra_roots_dropped: int = 0
    threads: int = 0
    rejected_threads: List[str] = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def _strip_prefix(value):
    if value is None:
        return None
    value = str(value)
    for prefix in PUSHSHIFT_PREFIXES:
        if value.startswith(prefix):
            return value[len(prefix):]
    return value


class ThreadParser:
    """Service for parsing line-delimited comment records into validated trees."""

    def __init__(self, fmt="generic-jsonl", max_workers=1):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown input format '{fmt}', expected one of {FORMATS}")
        self.fmt = fmt
        self.max_workers = max_workers
        self.report = ParseReport()

    def normalize_record(self, record):
        """Map a raw record to {id, parent_id, thread_id, body} or None if unusable."""
        if not isinstance(record, dict):
            return None
        if self.fmt == "pushshift":
            comment_id = record.get("id")
            parent_id = _strip_prefix(record.get("parent_id"))
            thread_id = _strip_prefix(record.get("link_id")) or record.get("thread_id")
            body = record.get("body")
            if body is None and ("title" in record or "selftext" in record):
                # submission record: it is the root of its own thread
                body = " ".join(part for part in (record.get("title"), record.get("selftext")) if part)
                thread_id = thread_id or comment_id
                parent_id = None
        else:
            comment_id = record.get("id")
            parent_id = record.get("parent_id")
            thread_id = record.get("thread_id")
            body = record.get("body")

        if comment_id is None or thread_id is None or body is None:
            return None
        parent_id = None if parent_id in (None, "") else str(parent_id)
        return {
            "id": str(comment_id),
            "parent_id": parent_id,
            "thread_id": str(thread_id),
            "body": str(body),
        }

    def read_records(self, stream: Iterable[str]):
        """Decode, normalize and de-duplicate records; group them by thread in first-appearance order."""
        groups: "OrderedDict[str, List[dict]]" = OrderedDict()
        seen_ids = set()
        for line_number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            self.report.records += 1
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                self.report.malformed += 1
                logger.warning(f"Skipping malformed record on line {line_number}: {e}")
                continue

            record = self.normalize_record(raw)
            if record is None:
                self.report.malformed += 1
                logger.warning(f"Skipping record on line {line_number}: missing id, thread_id or body")
                continue
            if record["id"] in seen_ids:
                self.report.duplicate_ids += 1
                logger.warning(f"Rejecting duplicate comment id '{record['id']}' on line {line_number}")
                continue

            seen_ids.add(record["id"])
            groups.setdefault(record["thread_id"], []).append(record)
        return groups

    def build_tree(self, thread_id: str, records: Sequence[dict]) -> Tuple[Optional[DiscussionTree], Counter]:
        """Validate one thread's records into a tree (None if rejected) plus its drop counts.

        Touches no shared parser state.
        """
        drops: Counter = Counter()
        by_id = {r["id"]: r for r in records}
        parent = {r["id"]: r["parent_id"] for r in records}

        # cycle check: every parent chain must terminate
        for start in by_id:
            visited = set()
            node = start
            while node is not None and node in by_id:
                if node in visited:
                    drops["cyclic_threads"] += 1
                    logger.error(f"Rejecting thread '{thread_id}': cyclic parent chain through '{node}'")
                    return None, drops
                visited.add(node)
                node = parent[node]

        roots = [r["id"] for r in records if r["parent_id"] is None]
        if not roots:
            drops["orphans_dropped"] += len(records)
            logger.warning(f"Dropping thread '{thread_id}': no root comment ({len(records)} orphans)")
            return None, drops
        root_id = roots[0]

        children: Dict[str, List[str]] = {r["id"]: [] for r in records}
        for r in records:
            if r["parent_id"] is not None and r["parent_id"] in children:
                children[r["parent_id"]].append(r["id"])

        levels: Dict[str, int] = {}
        frontier = [root_id]
        level = 1
        while frontier:
            next_frontier = []
            for node in frontier:
                levels[node] = level
                next_frontier.extend(children[node])
            frontier = next_frontier
            level += 1

        extra_root_nodes = 0
        for other_root in roots[1:]:
            stack = [other_root]
            while stack:
                node = stack.pop()
                extra_root_nodes += 1
                stack.extend(children[node])
        dropped = len(records) - len(levels) - extra_root_nodes
        if extra_root_nodes:
            drops["extra_roots_dropped"] += extra_root_nodes
            logger.warning(f"Thread '{thread_id}': dropped {extra_root_nodes} comments under {len(roots) - 1} extra root(s)")
        if dropped:
            drops["orphans_dropped"] += dropped
            logger.warning(f"Thread '{thread_id}': dropped {dropped} orphaned comments")

        comments = {
            r["id"]: Comment(id=r["id"], parent_id=r["parent_id"], thread_id=thread_id,
                             raw_text=r["body"], level=levels[r["id"]])
            for r in records if r["id"] in levels
        }
        tree = DiscussionTree(
            thread_id=thread_id,
            root_id=root_id,
            children={node: tuple(kids) for node, kids in children.items() if node in levels},
            comments=comments,
        )
        return tree, drops

    def parse(self, stream: Iterable[str]) -> List[DiscussionTree]:
        self.report = ParseReport()
        groups = self.read_records(stream)

        items = list(groups.items())
        if self.max_workers and self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                built = list(executor.map(lambda item: self.build_tree(*item), items))
        else:
            built = [self.build_tree(thread_id, records) for thread_id, records in items]

        # fold per-thread counts in input order
        trees = []
        for (thread_id, _), (tree, drops) in zip(items, built):
            for name, count in drops.items():
                setattr(self.report, name, getattr(self.report, name) + count)
            if tree is None:
                self.report.rejected_threads.append(thread_id)
            else:
                trees.append(tree)
        self.report.threads = len(trees)
        self.report.accepted = sum(len(tree) for tree in trees)
        logger.info(f"Parsed {len(trees)} threads with {self.report.accepted} comments "
                    f"({self.report.duplicate_ids} duplicates, {self.report.orphans_dropped} orphans, "
                    f"{self.report.cyclic_threads} cyclic threads)")
        return trees


class Tokenizer:
    """Lowercase, split on non-alphanumeric runs, drop short terms and stopwords."""

    def __init__(self, config: Optional[TokenizerConfig] = None):
        self.config = config or TokenizerConfig()
        self.stopwords = set(self.config.stopwords)
        if self.config.use_default_stopwords:
            self.stopwords |= DEFAULT_STOPWORDS

    def tokenize(self, raw_text: str) -> List[str]:
        return [
            term for term in TOKEN_PATTERN.findall((raw_text or "").lower())
            if len(term) >= self.config.min_len and term not in self.stopwords
        ]


def build_vocabulary(corpus_terms, min_count=1) -> Vocabulary:
    """Vocabulary over ``corpus_terms`` (documents of terms, or bare terms) in first-occurrence order."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts = Counter()
    order: List[str] = []
    for item in corpus_terms:
        terms = [item] if isinstance(item, str) else item
        for term in terms:
            if term not in counts:
                order.append(term)
            counts[term] += 1
    kept = [term for term in order if counts[term] >= min_count]
    return Vocabulary(kept, [counts[term] for term in kept])


def compute_levels(tree: DiscussionTree) -> Dict[str, int]:
    """Level of every comment: root = 1, child = parent + 1."""
    return {node: depth + 1 for node, depth in tree.breadth_first()}


def level_histogram(tree: DiscussionTree) -> Dict[int, int]:
    """Number of comments per level."""
    histogram: Dict[int, int] = {}
    for level in compute_levels(tree).values():
        histogram[level] = histogram.get(level, 0) + 1
    return dict(sorted(histogram.items()))


def build_corpus(trees: Sequence[DiscussionTree], tokenizer_config: Optional[TokenizerConfig] = None,
                 min_count=1) -> Corpus:
    """Tokenize every comment, build the vocabulary and index the comments."""
    tokenizer = Tokenizer(tokenizer_config)
    terms_by_id: Dict[str, List[str]] = {}
    ordered_terms = []
    for tree in trees:
        for comment_id in tree.preorder():
            terms = tokenizer.tokenize(tree.comments[comment_id].raw_text)
            terms_by_id[comment_id] = terms
            ordered_terms.append(terms)

    vocabulary = build_vocabulary(ordered_terms, min_count=min_count)
    tokenized = []
    for tree in trees:
        comments = {
            cid: comment.model_copy(update={
                "tokens": tuple(vocabulary[t] for t in terms_by_id[cid] if t in vocabulary)
            })
            for cid, comment in tree.comments.items()
        }
        tokenized.append(tree.model_copy(update={"comments": comments}))

    corpus = Corpus(tokenized, vocabulary)
    logger.info(f"Built corpus: {corpus.n_comments} comments, {corpus.n_tokens} tokens, V={len(vocabulary)}")
    return corpus


def filter_threads(trees: Sequence[DiscussionTree], min_descendants=0) -> List[DiscussionTree]:
    """Keep threads whose root has at least ``min_descendants`` descendants at any depth."""
    kept = [tree for tree in trees if tree.descendant_count() >= min_descendants]
    if len(kept) < len(trees):
        logger.info(f"Descendant filter (>= {min_descendants}) kept {len(kept)} of {len(trees)} threads")
    return kept


def trees_to_records(trees: Sequence[DiscussionTree]) -> List[dict]:
    """generic-jsonl records, parents before children, siblings in order."""
    records = []
    for tree in trees:
        for comment_id in tree.preorder():
            comment = tree.comments[comment_id]
            records.append({
                "id": comment.id,
                "parent_id": comment.parent_id,
                "thread_id": comment.thread_id,
                "body": comment.raw_text,
            })
    return records


# Standalone function wrappers
def parse_threads(stream, fmt="generic-jsonl", max_workers=1):
    """Parse a line-delimited stream into validated trees."""
    parser = ThreadParser(fmt=fmt, max_workers=max_workers)
    return parser.parse(stream)


def tokenize(raw_text, config=None):
    """Tokenize one comment body."""
    return Tokenizer(config).tokenize(raw_text)
