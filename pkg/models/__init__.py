# Import models
from models.thread import Comment, Corpus, DiscussionTree, TokenizerConfig, Vocabulary
from models.weights import SequenceVariant, WeightSequence
from models.topic_model import SamplerConfig, SamplerState, TopicAssignment, TopicModel
from models.evaluation import MEASURES, CoherenceReport, GroundTruth, SyntheticSpec
