"""Domain types for discussion threads, vocabularies and corpora."""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class TokenizerConfig(BaseModel):
    """Settings for turning raw comment text into terms"""

    model_config = ConfigDict(frozen=True)

    min_len: int = Field(default=2, ge=1)
    stopwords: FrozenSet[str] = frozenset()
    use_default_stopwords: bool = False

    @field_validator("stopwords", mode="before")
    @classmethod
    def _lowercase_stopwords(cls, value):
        return frozenset(str(term).lower() for term in (value or ()))


class Comment(BaseModel):
    """One node of a reply tree"""

    model_config = ConfigDict(frozen=True)

    id: str
    parent_id: Optional[str] = None
    thread_id: str
    raw_text: str = ""
    tokens: Tuple[int, ...] = ()
    level: int = Field(default=1, ge=1)

    def __repr__(self):
        return f"<Comment {self.id}: thread={self.thread_id} level={self.level}>"


class DiscussionTree(BaseModel):
    """Validated reply tree of a single thread.

    ``children`` lists child ids in file order; every comment appears as a key
    of ``children`` (leaves map to an empty list).
    """

    model_config = ConfigDict(frozen=True)

    thread_id: str
    root_id: str
    children: Dict[str, Tuple[str, ...]]
    comments: Dict[str, Comment]

    def __len__(self) -> int:
        return len(self.comments)

    def __contains__(self, comment_id: str) -> bool:
        return comment_id in self.comments

    def parent_of(self, comment_id: str) -> Optional[str]:
        return self.comments[comment_id].parent_id

    def preorder(self) -> Iterator[str]:
        """Yield comment ids root first, children in file order."""
        stack = [self.root_id]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(self.children.get(node, ())))

    def breadth_first(self) -> Iterator[Tuple[str, int]]:
        """Yield (comment id, depth) pairs with the root at depth 0."""
        frontier = [self.root_id]
        depth = 0
        while frontier:
            next_frontier = []
            for node in frontier:
                yield node, depth
                next_frontier.extend(self.children.get(node, ()))
            frontier = next_frontier
            depth += 1

    def descendant_count(self, comment_id: Optional[str] = None) -> int:
        start = comment_id or self.root_id
        count = 0
        stack = list(self.children.get(start, ()))
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(self.children.get(node, ()))
        return count

    def __repr__(self):
        return f"<DiscussionTree {self.thread_id}: {len(self.comments)} comments>"


class Vocabulary:
    """Dense term <-> index bijection with corpus frequencies"""

    def __init__(self, terms: Sequence[str] = (), frequencies: Sequence[int] = ()):
        self.terms: List[str] = list(terms)
        self.frequencies: List[int] = list(frequencies)
        if len(self.terms) != len(self.frequencies):
            raise ValueError("terms and frequencies must have the same length")
        self.index: Dict[str, int] = {term: i for i, term in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def __getitem__(self, term: str) -> int:
        return self.index[term]

    def term(self, index: int) -> str:
        return self.terms[index]

    def frequency(self, term: str) -> int:
        return self.frequencies[self.index[term]]

    def to_dict(self) -> Dict[str, int]:
        return dict(self.index)

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.terms == other.terms and self.frequencies == other.frequencies

    def __repr__(self):
        return f"<Vocabulary {len(self.terms)} terms>"


class Corpus:
    """Trees plus the flattened, globally indexed comment list.

    Comments are indexed 0..C-1 in thread order, pre-order within a thread.
    """

    def __init__(self, trees: Sequence[DiscussionTree], vocabulary: Vocabulary):
        self.trees: List[DiscussionTree] = list(trees)
        self.vocabulary = vocabulary
        self.comments: List[Comment] = []
        self.tree_of: Dict[str, DiscussionTree] = {}
        for tree in self.trees:
            for comment_id in tree.preorder():
                self.comments.append(tree.comments[comment_id])
                self.tree_of[comment_id] = tree
        self.comment_index: Dict[str, int] = {c.id: i for i, c in enumerate(self.comments)}
        if len(self.comment_index) != len(self.comments):
            raise ValueError("comment ids must be unique across the corpus")

        vocab_size = len(vocabulary)
        for comment in self.comments:
            if any(t < 0 or t >= vocab_size for t in comment.tokens):
                raise ValueError(f"comment {comment.id} has a token index outside the vocabulary")

    @property
    def n_comments(self) -> int:
        return len(self.comments)

    @property
    def n_tokens(self) -> int:
        return sum(len(c.tokens) for c in self.comments)

    def comment(self, comment_id: str) -> Comment:
        return self.comments[self.comment_index[comment_id]]

    def subcorpus(self, thread_id: str) -> "Corpus":
        """Single-thread corpus sharing this corpus' vocabulary."""
        trees = [tree for tree in self.trees if tree.thread_id == thread_id]
        if not trees:
            raise KeyError(thread_id)
        return Corpus(trees, self.vocabulary)

    def __repr__(self):
        return f"<Corpus {len(self.trees)} threads, {len(self.comments)} comments, V={len(self.vocabulary)}>"
