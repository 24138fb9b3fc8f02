from rest_framework.routers import DefaultRouter
from .views import EvaluationReportViewSet

router = DefaultRouter()
router.register(r'', EvaluationReportViewSet, basename='report')

urlpatterns = router.urls
